#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mirrorbit/programming.hpp"

using namespace mirrorbit;

namespace {

const DeviceState& nominal() {
  static DeviceState dev = DeviceState::nominal();
  return dev;
}

double reference() {
  static double ref = uw_midpoint_reference(nominal());
  return ref;
}

}  // namespace

TEST_CASE("state labels carry the 2-bit code") {
  CHECK(bits_string(StateLabel::UWH) == "00");
  CHECK(bits_string(StateLabel::UWL) == "11");
  CHECK(bits_string(StateLabel::SW) == "01");
  CHECK(bits_string(StateLabel::DW) == "10");
  CHECK(state_from_string("DW") == StateLabel::DW);
  CHECK_THROWS_AS(state_from_string("XX"), InputError);
}

TEST_CASE("classification truth table with tie rule") {
  double ref = 0.5;
  CHECK(classify(0.9, 0.9, ref) == StateLabel::UWH);
  CHECK(classify(0.1, 0.2, ref) == StateLabel::UWL);
  CHECK(classify(0.9, 0.1, ref) == StateLabel::DW);
  CHECK(classify(0.1, 0.9, ref) == StateLabel::SW);
  CHECK(classify(ref, ref, ref) == StateLabel::UWL);  // ties count as low
  CHECK(classify(ref, 0.9, ref) == StateLabel::SW);
  CHECK_THROWS_AS(classify(std::nan(""), 0.0, 0.0), InputError);
}

TEST_CASE("all-zero waveform is a bitwise identity") {
  auto dev = program_state(nominal(), StateLabel::SW);
  PulseWaveform wf;
  wf.steps.push_back({1e-6, 0, 0, 0, 0});
  wf.steps.push_back({1e-6, 0, 0, 0, 0});
  auto after = apply_waveform(dev, wf);
  CHECK(after == dev);

  PulseWaveform bad;
  bad.steps.push_back({0.0, 1.0, 0, 0, 0});
  CHECK_THROWS_AS(apply_waveform(dev, bad), InputError);
  bad.steps[0] = {1e-6, std::nan(""), 0, 0, 0};
  CHECK_THROWS_AS(apply_waveform(dev, bad), InputError);
}

TEST_CASE("gate pulse drives every segment to uniform polarization") {
  auto dev = program_state(nominal(), StateLabel::UWL);
  for (const auto& s : dev.segments) {
    CHECK(s.polarization() > 1.5);
    CHECK(s.base() == HysteresisState::Base::FromPosSat);
  }
  auto hi = program_state(dev, StateLabel::UWH);
  for (const auto& s : hi.segments) CHECK(s.polarization() < -1.5);
}

TEST_CASE("source pulse on a UWL device switches near the source only") {
  auto dev = program_state(nominal(), StateLabel::SW);
  CHECK(dev.segments.front().polarization() < -1.5);  // source end switched up
  CHECK(dev.segments.back().polarization() > 1.5);    // drain end undisturbed
  // monotone gradient in between
  for (int k = 1; k < dev.n_seg; ++k)
    CHECK(dev.segments[k].polarization() >= dev.segments[k - 1].polarization() - 1e-9);
}

TEST_CASE("overwrite erases history: DW then UWL equals fresh UWL") {
  auto via_dw = program_state(program_state(nominal(), StateLabel::DW), StateLabel::UWL);
  auto fresh = program_state(nominal(), StateLabel::UWL);
  CHECK(via_dw.segments == fresh.segments);
  CHECK(via_dw == fresh);
}

TEST_CASE("programming is idempotent") {
  for (auto s : {StateLabel::UWH, StateLabel::UWL, StateLabel::SW, StateLabel::DW}) {
    auto once = program_state(nominal(), s);
    auto twice = program_state(once, s);
    REQUIRE(once.segments.size() == twice.segments.size());
    for (int k = 0; k < once.n_seg; ++k)
      CHECK(std::fabs(once.segments[k].polarization() - twice.segments[k].polarization()) <=
            1e-6);
  }
}

TEST_CASE("four-state round trip with the midpoint reference") {
  double ref = reference();
  for (auto s : {StateLabel::UWH, StateLabel::UWL, StateLabel::SW, StateLabel::DW}) {
    auto r = read_cell(program_state(nominal(), s), 1.5, ref);
    CHECK(r.label == s);
  }
}

TEST_CASE("uniform states read symmetrically; ordering around the reference") {
  double ref = reference();
  auto low = read_cell(program_state(nominal(), StateLabel::UWL), 1.5, ref);
  auto high = read_cell(program_state(nominal(), StateLabel::UWH), 1.5, ref);
  CHECK(std::fabs(low.vt_dr - low.vt_sr) <= 5e-3);
  CHECK(std::fabs(high.vt_dr - high.vt_sr) <= 5e-3);
  CHECK(low.vt_dr < ref);
  CHECK(high.vt_dr > ref);
}

TEST_CASE("mirror duality between SW and DW") {
  double ref = reference();
  auto sw = read_cell(program_state(nominal(), StateLabel::SW), 1.5, ref);
  auto dw = read_cell(program_state(nominal(), StateLabel::DW), 1.5, ref);
  CHECK(std::fabs(sw.vt_sr - dw.vt_dr) <= 1e-3);
  CHECK(std::fabs(sw.vt_dr - dw.vt_sr) <= 1e-3);
  // the written side reads high, the other stays near the low state
  CHECK(dw.vt_dr > ref);
  CHECK(dw.vt_sr < ref);
  CHECK(sw.vt_sr > ref);
  CHECK(sw.vt_dr < ref);
}

TEST_CASE("read_cell input checks") {
  CHECK_THROWS_AS(read_cell(nominal(), 0.0, 0.5), InputError);
  CHECK_THROWS_AS(read_cell(nominal(), -1.5, 0.5), InputError);
}

TEST_CASE("device variation: determinism and degenerate sigma") {
  SigmaSpec zero;
  auto pop = sample_device_variation(nominal(), zero, 42, 3);
  REQUIRE(pop.size() == 3);
  for (const auto& d : pop) CHECK(d == nominal());

  SigmaSpec sig;
  sig.pr_rel = 0.03;
  sig.ec_rel = 0.03;
  sig.vfb_abs_v = 0.02;
  auto a = sample_device_variation(nominal(), sig, 7, 6);
  auto b = sample_device_variation(nominal(), sig, 7, 6);
  REQUIRE(a.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i].stack.ferro.pr < a[i].stack.ferro.ps);
  }
  // different seed, different draws
  auto c = sample_device_variation(nominal(), sig, 8, 6);
  bool any_diff = false;
  for (int i = 0; i < 6; ++i) any_diff = any_diff || !(c[i] == a[i]);
  CHECK(any_diff);

  CHECK_THROWS_AS(sample_device_variation(nominal(), sig, 7, 0), InputError);
  SigmaSpec wild;
  wild.ec_rel = 0.4;  // 3 sigma would cross ec <= 0
  CHECK_THROWS_AS(sample_device_variation(nominal(), wild, 7, 2), ParameterError);
}

TEST_CASE("JSON state dump restores the exact device") {
  auto dev = program_state(nominal(), StateLabel::SW);
  auto text = device_to_json(dev);
  auto back = device_from_json(text);
  CHECK(back == dev);
  // a second round trip is byte-stable
  CHECK(device_to_json(back) == text);
}
