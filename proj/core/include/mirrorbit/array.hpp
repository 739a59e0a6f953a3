#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mirrorbit/programming.hpp"

namespace mirrorbit {

enum class Topology { AND_1F, T3_1F };
enum class Scheme { FULL_V, V_HALF, V_THIRD };

const char* to_string(Topology t);
const char* to_string(Scheme s);
Topology topology_from_string(const std::string& s);
Scheme scheme_from_string(const std::string& s);

enum class SelClass { Selected, HalfSelected, Unselected };
const char* to_string(SelClass c);

struct CellBias {
  double v_g = 0.0, v_d = 0.0, v_s = 0.0, v_b = 0.0;
  SelClass cls = SelClass::Unselected;
  /// largest voltage magnitude across any pair of the cell's terminals
  double max_pair_drop() const;
};

/// One physical pulse of a program operation.
enum class PulseKind { GatePos, GateNeg, DrainPulse, SourcePulse };
const char* to_string(PulseKind k);

/// Pulse sequence realizing a state write (SW/DW start from a UWL init).
std::vector<PulseKind> pulses_for(StateLabel target);

struct DisturbRow {
  long event = 0;
  int row = 0, col = 0;
  SelClass cls = SelClass::Unselected;
  double dvt_dr = 0.0, dvt_sr = 0.0;
};

struct ArrayModel {
  int rows = 0, cols = 0;
  Topology topology = Topology::AND_1F;
  Scheme scheme = Scheme::V_THIRD;
  std::vector<DeviceState> cells;  // row-major
  double reference_vt = 0.0;
  WriteSettings write = {};
  ReadSettings read = {};
  double v_read = 1.5;

  long event_count = 0;
  std::vector<DisturbRow> ledger;

  // per-cell stationarity cache: once an identical inhibit event maps a
  // cell's state onto itself (minor loops close on revisit), repeats are
  // skipped; purely an evaluation shortcut, never changes results
  struct StationaryKey {
    bool valid = false;
    PulseKind kind = PulseKind::GatePos;
    double v_g = 0, v_d = 0, v_s = 0, v_b = 0;
    DeviceState state;
  };
  std::vector<StationaryKey> stationary;

  static ArrayModel make(int rows, int cols, Topology topology, Scheme scheme,
                         const DeviceState& nominal,
                         std::optional<double> reference = std::nullopt);

  DeviceState& cell(int r, int c);
  const DeviceState& cell(int r, int c) const;
  void check_address(int r, int c) const;  // throws AddressError
};

/// Per-cell terminal voltages for one pulse. The selected cell receives the
/// full programming levels; inhibit lines follow the V, V/2 or V/3-and-2V/3
/// ladder; 3T-1FeFET isolates every non-selected cell at zero bias.
std::vector<CellBias> bias_map(const ArrayModel& arr, int row, int col, PulseKind kind);

/// Applies one pulse through the full device model on every cell; records
/// per-cell threshold shifts of disturbed cells in the ledger.
void array_execute_pulse(ArrayModel& arr, int row, int col, PulseKind kind);

/// Runs the full pulse sequence writing `target` into (row, col).
ArrayModel array_execute(ArrayModel arr, int row, int col, StateLabel target);

struct SensePhase {
  std::string phase;  // "DR" or "SR"
  std::string lines;  // line settings for the audit log
  double vt = 0.0;
  bool above_reference = false;
};

struct SenseResult {
  uint8_t bits = 0;
  StateLabel label = StateLabel::UWL;
  std::array<SensePhase, 2> phases;
};

/// Serial (two phase) sensing of one cell: DR then SR, each latching one
/// above/below-reference decision into the 2-bit result. Read-only and
/// idempotent; throws SenseFault naming the phase on a stuck cell.
SenseResult sense_serial(const ArrayModel& arr, int row, int col);

/// Array image: topology, scheme, per-cell labels and threshold pairs.
std::string array_image_json(const ArrayModel& arr);
/// Rebuilds an array by programming the image's labels onto fresh copies of
/// `nominal`.
ArrayModel array_image_restore(const std::string& json_text, const DeviceState& nominal);

/// CSV rows: header `event,row,col,class,dvt_dr,dvt_sr`.
std::string disturb_ledger_csv(const std::vector<DisturbRow>& rows);

}  // namespace mirrorbit
