#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirrorbit/transport.hpp"

namespace mirrorbit {

/// The four cell states and their 2-bit codes.
enum class StateLabel : uint8_t {
  UWH = 0b00,  // uniform write, high threshold
  UWL = 0b11,  // uniform write, low threshold
  SW = 0b01,   // source write
  DW = 0b10,   // drain write
};

const char* to_string(StateLabel s);
StateLabel state_from_string(const std::string& name);
inline uint8_t bits_of(StateLabel s) { return static_cast<uint8_t>(s); }
std::string bits_string(StateLabel s);

struct PulseStep {
  double duration_s = 1e-6;
  double v_g = 0.0, v_d = 0.0, v_s = 0.0, v_b = 0.0;
};

struct PulseWaveform {
  std::vector<PulseStep> steps;
  std::string label;
};

/// Programming pulse amplitudes/widths. Widths are recorded but the response
/// is quasi-static: only the field path matters.
struct WriteSettings {
  double gate_amp_v = 4.5;
  double gate_width_s = 1e-6;
  double terminal_amp_v = 3.6;
  double terminal_width_s = 400e-6;
};

/// Applies a terminal waveform quasi-statically: each step is ramped from
/// the previous levels in `dev.write_substeps` sub-biases; at each sub-bias
/// the channel potential profile is evaluated, every segment's vertical
/// stack is solved at the local channel potential, and the hysteresis update
/// is committed at the converged ferroelectric field.
DeviceState apply_waveform(DeviceState dev, const PulseWaveform& wf);

PulseWaveform waveform_for(StateLabel target, const WriteSettings& ws = {});

/// UWH/UWL: single +-gate pulse. SW/DW: UWL initialization followed by the
/// source (resp. drain) terminal pulse.
DeviceState program_state(DeviceState dev, StateLabel target, const WriteSettings& ws = {});

struct ReadSettings {
  double sweep_lo_v = -0.5;
  double sweep_hi_v = 1.5;
  int points = 201;
};

struct ReadResult {
  double vt_dr = 0.0;  // threshold from the source-driven sweep (drain read)
  double vt_sr = 0.0;  // threshold from the drain-driven sweep (source read)
  StateLabel label = StateLabel::UWL;
  double reference_vt = 0.0;
};

/// Two frozen-polarization transfer sweeps (read voltage at the drain for
/// SR, at the source for DR), constant-current extraction, classification.
/// Throws NoCrossingError annotated with the stuck direction.
ReadResult read_cell(const DeviceState& dev, double v_read, double reference_vt,
                     const ReadSettings& rs = {});

/// Truth table: both high -> UWH, both low -> UWL, DR high & SR low -> DW,
/// DR low & SR high -> SW. "High" means strictly above the reference.
StateLabel classify(double vt_dr, double vt_sr, double reference_vt);

/// Midpoint of the UWL/UWH thresholds of this device family.
double uw_midpoint_reference(const DeviceState& nominal, double v_read = 1.5,
                             const ReadSettings& rs = {});

/// Relative deviations; vfb is an absolute spread in volts. The polarization
/// draw scales pr and ps together (loop magnitude variation keeps pr < ps).
struct SigmaSpec {
  double pr_rel = 0.0;
  double ec_rel = 0.0;
  double vfb_abs_v = 0.0;
  double nit_rel = 0.0;
};

/// Deterministic per-seed truncated-normal (+-3 sigma) parameter draws,
/// independent per device. Each returned device passes its invariants.
std::vector<DeviceState> sample_device_variation(const DeviceState& nominal,
                                                 const SigmaSpec& sigma, uint64_t seed,
                                                 int n);

/// Lossless JSON state dump/restore.
std::string device_to_json(const DeviceState& dev);
DeviceState device_from_json(const std::string& text);

}  // namespace mirrorbit
