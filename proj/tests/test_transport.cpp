#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mirrorbit/transport.hpp"

using namespace mirrorbit;

namespace {

// settle every segment's remanent operating point at zero bias
void settle(DeviceState& dev) {
  for (int k = 0; k < dev.n_seg; ++k) {
    auto sol = solve_vertical_stack(0.0, 0.0, dev.segments[k], dev.stack, dev.q_worn_uc(k));
    dev.segments[k].apply_field(sol.e_fe, dev.stack.ferro);
  }
}

DeviceState uniform_device(int sign) {
  DeviceState dev = DeviceState::nominal();
  for (auto& s : dev.segments) s = HysteresisState::saturated(sign, dev.stack.ferro);
  settle(dev);
  return dev;
}

// drain-side barrier: up-polarized segments adjacent to the drain
DeviceState dw_like_device(double barrier_frac = 0.45) {
  DeviceState dev = DeviceState::nominal();
  int k_edge = static_cast<int>(dev.n_seg * (1.0 - barrier_frac));
  for (int k = 0; k < dev.n_seg; ++k)
    dev.segments[k] = HysteresisState::saturated(k >= k_edge ? -1 : +1, dev.stack.ferro);
  settle(dev);
  return dev;
}

DeviceState mirrored(const DeviceState& dev) {
  DeviceState m = dev;
  for (int k = 0; k < dev.n_seg; ++k) {
    m.segments[k] = dev.segments[dev.n_seg - 1 - k];
    m.worn_occ[k] = dev.worn_occ[dev.n_seg - 1 - k];
    m.p_base[k] = dev.p_base[dev.n_seg - 1 - k];
  }
  return m;
}

}  // namespace

TEST_CASE("equilibrium: equal terminal potentials give zero current") {
  auto dev = uniform_device(+1);
  for (double v : {0.0, 0.4}) {
    BiasPoint b{0.8, v, v, 0.0};
    auto sol = solve_channel(dev, b);
    CHECK(std::fabs(sol.i_d) < 1e-18);
    CHECK(sol.i_s == -sol.i_d);
  }
}

TEST_CASE("series chain reproduces the single-element law on a uniform device") {
  auto dev = uniform_device(+1);
  // the interpolation law composes exactly in series, so the chain current
  // must match one element spanning the whole channel
  const auto& sp = dev.stack;
  double n = sp.ideality_n();
  double vt_local = segment_threshold(dev.segments[0], 0.0, sp);
  double vt_th = sp.vt_th();
  double i0 = 2.0 * n * dev.mobility_cm2_vs * sp.c_stack_uc() * 1e-6 * vt_th * vt_th;
  auto f = [&](double u) {
    double s = 0.5 * u;
    double lg = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    return lg * lg;
  };
  for (double vg : {0.3, 0.6, 1.0}) {
    BiasPoint b{vg, 0.1, 0.0, 0.0};
    auto sol = solve_channel(dev, b);
    double vp = (vg - vt_local) / n;
    // screening at 0.1 V trims ~10 nm; account for the effective length
    double ls = junction_screen_len_nm(0.1, dev);
    double i_ref = i0 * dev.w_nm / (dev.l_nm - ls) *
                   (f((vp - 0.0) / vt_th) - f((vp - 0.1) / vt_th));
    CHECK(sol.i_d == doctest::Approx(i_ref).epsilon(1e-6));
    CHECK(sol.spread <= 1e-6);
  }
}

TEST_CASE("triode regime: conductance scales with overdrive") {
  auto dev = uniform_device(+1);
  double vt_low = segment_threshold(dev.segments[0], 0.0, dev.stack);
  double n = dev.stack.ideality_n();
  double dv = 0.01;
  auto g_at = [&](double vg) {
    BiasPoint b{vg, dv, 0.0, 0.0};
    return solve_channel(dev, b).i_d / dv;
  };
  double od1 = 0.5, od2 = 1.0;
  double g1 = g_at(vt_low + n * od1);
  double g2 = g_at(vt_low + n * od2);
  CHECK(g2 / g1 == doctest::Approx(od2 / od1).epsilon(0.08));
}

TEST_CASE("deep subthreshold current saturates with drain bias") {
  auto dev = uniform_device(-1);  // high-threshold device
  double i1 = solve_channel(dev, {0.4, 0.3, 0.0, 0.0}).i_d;
  double i2 = solve_channel(dev, {0.4, 0.6, 0.0, 0.0}).i_d;
  CHECK(i1 > 0.0);
  CHECK(i2 == doctest::Approx(i1).epsilon(0.02));
}

TEST_CASE("terminal swap antisymmetry on a uniform device") {
  auto dev = uniform_device(+1);
  for (double vg : {0.2, 0.8}) {
    auto a = solve_channel(dev, {vg, 0.7, 0.1, 0.0});
    auto b = solve_channel(dev, {vg, 0.1, 0.7, 0.0});
    CHECK(a.i_d == doctest::Approx(-b.i_d).epsilon(1e-6));
  }
}

TEST_CASE("geometric mirror symmetry on an asymmetric pattern") {
  auto dev = dw_like_device();
  auto mir = mirrored(dev);
  for (double vg : {0.2, 0.55, 1.0}) {
    auto a = solve_channel(dev, {vg, 1.5, 0.0, 0.0});
    auto b = solve_channel(mir, {vg, 0.0, 1.5, 0.0});
    CHECK(std::fabs(a.i_d) == doctest::Approx(std::fabs(b.i_s)).epsilon(1e-9));
  }
}

TEST_CASE("node potentials are monotone between the terminals") {
  auto dev = dw_like_device();
  auto sol = solve_channel(dev, {0.6, 1.5, 0.0, 0.0});
  for (std::size_t j = 1; j < sol.node_v.size(); ++j)
    CHECK(sol.node_v[j] >= sol.node_v[j - 1] - 1e-12);
}

TEST_CASE("directional read asymmetry of a drain-side barrier") {
  auto dev = dw_like_device();
  double vg = 0.54;  // mid-window
  double i_sr = std::fabs(solve_channel(dev, {vg, 1.5, 0.0, 0.0}).i_d);  // read at drain
  double i_dr = std::fabs(solve_channel(dev, {vg, 0.0, 1.5, 0.0}).i_s);  // read at source
  CHECK(i_sr >= 10.0 * i_dr);

  // blocked branch saturates with read voltage
  double i_dr_10 = std::fabs(solve_channel(dev, {vg, 0.0, 1.0, 0.0}).i_s) + dev.current_floor_a;
  double i_dr_15 = i_dr + dev.current_floor_a;
  CHECK(i_dr_15 <= i_dr_10 * 1.05);
}

TEST_CASE("fully up-polarized device is off at negative gate") {
  auto dev = uniform_device(-1);
  auto sol = solve_channel(dev, {-0.5, 0.1, 0.0, 0.0});
  CHECK(std::fabs(sol.i_d) <= 1e-12);
}

TEST_CASE("newton and shooting solvers agree") {
  ChannelSolveOptions shoot;
  shoot.force_shooting = true;
  auto check_dev = [&](const DeviceState& dev, const BiasPoint& b) {
    auto a = solve_channel(dev, b);
    auto s = solve_channel(dev, b, shoot);
    double scale = std::max({std::fabs(a.i_d), std::fabs(s.i_d), 1e-16});
    CHECK(std::fabs(a.i_d - s.i_d) / scale <= 1e-5);
  };
  auto uni = uniform_device(+1);
  auto dw = dw_like_device();
  check_dev(uni, {0.6, 0.1, 0.0, 0.0});
  check_dev(uni, {1.2, 1.5, 0.0, 0.0});
  check_dev(dw, {0.54, 1.5, 0.0, 0.0});
  check_dev(dw, {0.54, 0.0, 1.5, 0.0});
}

TEST_CASE("transfer curve: monotone, ordered thresholds, degenerate sweep") {
  auto low = uniform_device(+1);
  auto high = uniform_device(-1);
  auto c_low = transfer_curve(low, ReadTerminal::Drain, 0.1, -0.5, 1.5, 81);
  auto c_high = transfer_curve(high, ReadTerminal::Drain, 0.1, -0.5, 1.5, 81);
  for (std::size_t i = 1; i < c_low.points.size(); ++i) {
    CHECK(c_low.points[i].i >= c_low.points[i - 1].i - 1e-20);
    CHECK(c_low.points[i].vg > c_low.points[i - 1].vg);
  }
  double vt_low = extract_vt(c_low, 240.0, 240.0);
  double vt_high = extract_vt(c_high, 240.0, 240.0);
  CHECK(vt_high > vt_low + 0.5);

  auto two = transfer_curve(low, ReadTerminal::Drain, 0.1, 0.0, 1.0, 2);
  CHECK(two.points.size() == 2);
  CHECK_THROWS_AS(transfer_curve(low, ReadTerminal::Drain, 0.1, 0.0, 1.0, 1), InputError);
}

TEST_CASE("constant-current extraction on a synthetic decade curve") {
  TransferCurve c;
  c.read_terminal = ReadTerminal::Drain;
  c.v_read = 0.1;
  for (int i = 0; i <= 100; ++i) {
    double vg = i * 0.01;
    c.points.push_back({vg, 1e-6 * std::pow(10.0, (vg - 0.6) / 0.1)});
  }
  CHECK(extract_vt(c, 240.0, 240.0) == doctest::Approx(0.600).epsilon(1e-6));

  TransferCurve flat;
  for (int i = 0; i <= 10; ++i) flat.points.push_back({i * 0.1, 1e-12});
  CHECK_THROWS_AS(extract_vt(flat, 240.0, 240.0), NoCrossingError);
}

TEST_CASE("curve CSV schema") {
  TransferCurve c;
  c.read_terminal = ReadTerminal::Source;
  c.v_read = 1.5;
  c.points.push_back({-0.5, 1e-14});
  auto csv = curve_to_csv(c);
  CHECK(csv.rfind("vg,i,terminal,vread\n", 0) == 0);
  CHECK(csv.find("-0.5,1e-14,source,1.5") != std::string::npos);
}

TEST_CASE("device validation") {
  auto dev = DeviceState::nominal();
  CHECK_NOTHROW(dev.validate());
  dev.n_seg = 4;
  CHECK_THROWS_AS(dev.validate(), ParameterError);
}
