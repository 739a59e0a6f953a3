#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mirrorbit/preisach.hpp"

using namespace mirrorbit;

namespace {

FerroParams table_params() { return FerroParams::make(5.99, 6.0, 0.7); }


}  // namespace

TEST_CASE("derive_delta matches the defining identity") {
  double d = derive_delta(5.99, 6.0, 0.7);
  CHECK(d == doctest::Approx(0.09874).epsilon(1e-3));
  // construction: ps*tanh(ec/(2 delta)) == pr
  CHECK(6.0 * std::tanh(0.7 / (2.0 * d)) == doctest::Approx(5.99).epsilon(1e-12));

  // square-loop limit: pr -> ps from below drives delta -> 0+
  double d_square = derive_delta(6.0 * (1.0 - 1e-12), 6.0, 0.7);
  CHECK(d_square > 0.0);
  CHECK(d_square < derive_delta(0.99 * 6.0, 6.0, 0.7));

  // pr = ps*tanh(1/2), ec = 1 inverts to delta = 1
  CHECK(derive_delta(6.0 * std::tanh(0.5), 6.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(derive_delta(6.0, 6.0, 0.7), ParameterError);
  CHECK_THROWS_AS(derive_delta(-1.0, 6.0, 0.7), ParameterError);
  CHECK_THROWS_AS(derive_delta(5.99, 6.0, 0.0), ParameterError);
}

TEST_CASE("saturated branch values") {
  auto fp = table_params();
  CHECK(saturated_branch(1e3, Direction::Ascending, fp) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(saturated_branch(1e3, Direction::Descending, fp) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(saturated_branch(0.0, Direction::Descending, fp) == doctest::Approx(5.99).epsilon(1e-12));
  CHECK(saturated_branch(0.7, Direction::Ascending, fp) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(saturated_branch(-0.7, Direction::Descending, fp) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("remanence identity after full switching") {
  auto fp = table_params();
  HysteresisState s;  // virgin
  s.apply_field(5.0 * fp.ec, fp);
  s.apply_field(0.0, fp);
  CHECK(s.polarization() == doctest::Approx(fp.pr).epsilon(1e-6));

  HysteresisState sn;
  sn.apply_field(-5.0 * fp.ec, fp);
  sn.apply_field(0.0, fp);
  CHECK(sn.polarization() == doctest::Approx(-fp.pr).epsilon(1e-6));
}

TEST_CASE("full switch through sub-clip field still erases history") {
  auto fp = table_params();
  // +2 MV/cm is far past the knee for the table loop but below the 5*ec clip
  HysteresisState s;
  s.apply_field(-0.4, fp);
  s.apply_field(0.3, fp);
  s.apply_field(2.0, fp);
  CHECK(s.turning_points().empty());
  CHECK(s.base() == HysteresisState::Base::FromPosSat);
  s.apply_field(0.0, fp);
  CHECK(s.polarization() == doctest::Approx(fp.pr).epsilon(1e-4));
}

TEST_CASE("return-point memory: closed sub-coercive cycle") {
  auto fp = table_params();
  HysteresisState s = HysteresisState::saturated(-1, fp);
  s.apply_field(0.45, fp);
  HysteresisState before = s;
  double p0 = s.polarization();
  s.apply_field(0.15, fp);
  s.apply_field(0.45, fp);
  CHECK(std::fabs(s.polarization() - p0) <= 1e-9);
  CHECK(s == before);  // wipe-out restores the exact state
}

TEST_CASE("wipe-out erases superseded turning points") {
  auto fp = table_params();
  HysteresisState a = HysteresisState::saturated(-1, fp);
  a.apply_field(0.5, fp);
  a.apply_field(0.2, fp);
  a.apply_field(0.6, fp);

  HysteresisState b = HysteresisState::saturated(-1, fp);
  b.apply_field(0.6, fp);
  CHECK(a == b);
  a.check_invariants(fp);
}

TEST_CASE("virgin origin provides return-point memory for first cycles") {
  auto fp = table_params();
  HysteresisState s;
  s.apply_field(0.3, fp);
  s.apply_field(0.0, fp);
  CHECK(std::fabs(s.polarization()) <= 1e-12);
  s.apply_field(-0.25, fp);
  s.apply_field(0.0, fp);
  CHECK(std::fabs(s.polarization()) <= 1e-12);
}

TEST_CASE("polarization is continuous and bounded along random paths") {
  auto fp = table_params();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-5.0 * fp.ec, 5.0 * fp.ec);
  for (int trial = 0; trial < 50; ++trial) {
    HysteresisState s;
    double e_prev = 0.0, p_prev = 0.0;
    for (int k = 0; k < 40; ++k) {
      double e_target = amp(rng);
      // walk toward the target in small steps; P must move continuously
      int steps = 64;
      for (int i = 1; i <= steps; ++i) {
        double e = e_prev + (e_target - e_prev) * i / steps;
        s.apply_field(e, fp);
        CHECK(std::fabs(s.polarization()) <= fp.ps + 1e-12);
        double de = std::fabs(e - e_prev) + 1e-12;
        // slope bound: steepest branch slope is ps/(2 delta), plus clip snap
        double dp_allow = fp.ps / (2.0 * fp.delta) * de * 1.26 +
                          2.1 * HysteresisState::kSatEps * fp.ps;
        CHECK(std::fabs(s.polarization() - p_prev) <= dp_allow);
        e_prev = e;
        p_prev = s.polarization();
      }
      s.check_invariants(fp);
    }
  }
}

TEST_CASE("hysteron_update free function matches member update") {
  auto fp = table_params();
  HysteresisState s = HysteresisState::saturated(-1, fp);
  auto [s2, p] = hysteron_update(s, 0.35, fp);
  HysteresisState ref = s;
  ref.apply_field(0.35, fp);
  CHECK(s2 == ref);
  CHECK(p == ref.polarization());
  CHECK_THROWS_AS(hysteron_update(s, std::nan(""), fp), InputError);
}

TEST_CASE("oracle: saturation and empty input") {
  auto fp = table_params();
  CHECK(preisach_plane_oracle({}, fp, 100).empty());
  auto out = preisach_plane_oracle({10.0 * fp.ec}, fp, 100);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(fp.ps).epsilon(2e-2));
  CHECK_THROWS_AS(preisach_plane_oracle({0.1}, fp, 10), ParameterError);
}

TEST_CASE("oracle: major loop matches the analytic branches within 2% of ps") {
  auto fp = table_params();
  PreisachPlaneOracle oracle(fp, 200);
  oracle.apply(-5.0 * fp.ec);
  double tol = 0.02 * fp.ps;
  for (int i = 0; i <= 100; ++i) {
    double e = -5.0 * fp.ec + i * (10.0 * fp.ec) / 100.0;
    double p = oracle.apply(e);
    CHECK(std::fabs(p - saturated_branch(e, Direction::Ascending, fp)) <= tol);
  }
  for (int i = 100; i >= 0; --i) {
    double e = -5.0 * fp.ec + i * (10.0 * fp.ec) / 100.0;
    double p = oracle.apply(e);
    CHECK(std::fabs(p - saturated_branch(e, Direction::Descending, fp)) <= tol);
  }
}

TEST_CASE("oracle equivalence: analytic kernel within 2% of ps on random sequences") {
  auto fp = table_params();
  PreisachPlaneOracle oracle(fp, 200);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> amp(-5.0 * fp.ec, 5.0 * fp.ec);
  std::uniform_int_distribution<int> len(1, 50);
  double tol = 0.02 * fp.ps;
  double worst = 0.0;
  for (int seq = 0; seq < 200; ++seq) {
    oracle.reset();
    HysteresisState s = HysteresisState::saturated(-1, fp);
    oracle.apply(-5.0 * fp.ec);
    int n = len(rng);
    for (int k = 0; k < n; ++k) {
      double e = amp(rng);
      double po = oracle.apply(e);
      s.apply_field(e, fp);
      worst = std::max(worst, std::fabs(po - s.polarization()));
    }
  }
  CHECK(worst <= tol);
  MESSAGE("worst analytic-vs-oracle deviation: ", worst, " uC/cm^2");
}

TEST_CASE("oracle exhibits wipe-out") {
  auto fp = table_params();
  PreisachPlaneOracle o1(fp, 120), o2(fp, 120);
  o1.apply(-5.0 * fp.ec);
  o2.apply(-5.0 * fp.ec);
  o1.apply(0.5);
  o1.apply(0.2);
  double pa = o1.apply(0.6);
  double pb = o2.apply(0.6);
  CHECK(pa == doctest::Approx(pb).epsilon(1e-12));
}
