#include "mirrorbit/array.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace mirrorbit {

const char* to_string(Topology t) { return t == Topology::AND_1F ? "AND_1F" : "T3_1F"; }
const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::FULL_V: return "FULL_V";
    case Scheme::V_HALF: return "V_HALF";
    case Scheme::V_THIRD: return "V_THIRD";
  }
  return "?";
}

Topology topology_from_string(const std::string& s) {
  if (s == "AND_1F") return Topology::AND_1F;
  if (s == "T3_1F") return Topology::T3_1F;
  throw InputError("unknown topology: " + s);
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "FULL_V") return Scheme::FULL_V;
  if (s == "V_HALF") return Scheme::V_HALF;
  if (s == "V_THIRD") return Scheme::V_THIRD;
  throw InputError("unknown scheme: " + s);
}

const char* to_string(SelClass c) {
  switch (c) {
    case SelClass::Selected: return "selected";
    case SelClass::HalfSelected: return "half_selected";
    case SelClass::Unselected: return "unselected";
  }
  return "?";
}

double CellBias::max_pair_drop() const {
  double gd = std::fabs(v_g - v_d);
  double gs = std::fabs(v_g - v_s);
  double ds = std::fabs(v_d - v_s);
  return std::max({gd, gs, ds});
}

std::vector<PulseKind> pulses_for(StateLabel target) {
  switch (target) {
    case StateLabel::UWL: return {PulseKind::GatePos};
    case StateLabel::UWH: return {PulseKind::GateNeg};
    case StateLabel::SW: return {PulseKind::GatePos, PulseKind::SourcePulse};
    case StateLabel::DW: return {PulseKind::GatePos, PulseKind::DrainPulse};
  }
  return {};
}

ArrayModel ArrayModel::make(int rows, int cols, Topology topology, Scheme scheme,
                            const DeviceState& nominal, std::optional<double> reference) {
  if (rows < 1 || cols < 1) throw ParameterError("ArrayModel: empty grid");
  nominal.validate();
  ArrayModel arr;
  arr.rows = rows;
  arr.cols = cols;
  arr.topology = topology;
  arr.scheme = scheme;
  arr.cells.assign(static_cast<std::size_t>(rows) * cols, nominal);
  arr.reference_vt = reference ? *reference : uw_midpoint_reference(nominal);
  return arr;
}

DeviceState& ArrayModel::cell(int r, int c) {
  check_address(r, c);
  return cells[static_cast<std::size_t>(r) * cols + c];
}

const DeviceState& ArrayModel::cell(int r, int c) const {
  check_address(r, c);
  return cells[static_cast<std::size_t>(r) * cols + c];
}

void ArrayModel::check_address(int r, int c) const {
  if (r < 0 || r >= rows || c < 0 || c >= cols)
    throw AddressError("ArrayModel: cell (" + std::to_string(r) + "," + std::to_string(c) +
                       ") out of range");
}

namespace {

struct LineLevels {
  double wl_sel, bl_sel, sl_sel;   // selected row / column lines
  double wl_oth, bl_oth, sl_oth;   // inhibit levels everywhere else
  double duration_s;
};

LineLevels levels_for(PulseKind kind, Scheme scheme, const WriteSettings& ws) {
  LineLevels lv{};
  auto ladder = [&](double v) {
    // inhibit fractions of the programming amplitude per scheme
    struct F { double wl, bl, sl; };
    switch (kind) {
      case PulseKind::GatePos:
      case PulseKind::GateNeg:
        // gate pulse: inhibit the shared-row cells through the column lines
        // and the shared-column cells through the other word lines
        if (scheme == Scheme::V_HALF) return F{0.5 * v, 0.5 * v, 0.5 * v};
        if (scheme == Scheme::V_THIRD) return F{v / 3.0, 2.0 * v / 3.0, 2.0 * v / 3.0};
        return F{0.0, 0.0, 0.0};
      case PulseKind::DrainPulse:
        if (scheme == Scheme::V_HALF) return F{0.5 * v, 0.5 * v, 0.5 * v};
        if (scheme == Scheme::V_THIRD) return F{2.0 * v / 3.0, v / 3.0, v / 3.0};
        return F{0.0, 0.0, 0.0};
      case PulseKind::SourcePulse:
        if (scheme == Scheme::V_HALF) return F{0.5 * v, 0.5 * v, 0.5 * v};
        if (scheme == Scheme::V_THIRD) return F{2.0 * v / 3.0, v / 3.0, v / 3.0};
        return F{0.0, 0.0, 0.0};
    }
    return F{0.0, 0.0, 0.0};
  };
  switch (kind) {
    case PulseKind::GatePos: {
      double v = ws.gate_amp_v;
      lv = {v, 0.0, 0.0, ladder(v).wl, ladder(v).bl, ladder(v).sl, ws.gate_width_s};
      break;
    }
    case PulseKind::GateNeg: {
      double v = ws.gate_amp_v;
      auto f = ladder(v);
      lv = {-v, 0.0, 0.0, -f.wl, -f.bl, -f.sl, ws.gate_width_s};
      break;
    }
    case PulseKind::DrainPulse: {
      double v = ws.terminal_amp_v;
      auto f = ladder(v);
      lv = {0.0, v, 0.0, f.wl, f.bl, f.sl, ws.terminal_width_s};
      break;
    }
    case PulseKind::SourcePulse: {
      double v = ws.terminal_amp_v;
      auto f = ladder(v);
      lv = {0.0, 0.0, v, f.wl, f.bl, f.sl, ws.terminal_width_s};
      break;
    }
  }
  return lv;
}

}  // namespace

std::vector<CellBias> bias_map(const ArrayModel& arr, int row, int col, PulseKind kind) {
  arr.check_address(row, col);
  LineLevels lv = levels_for(kind, arr.scheme, arr.write);
  std::vector<CellBias> grid(arr.cells.size());
  for (int i = 0; i < arr.rows; ++i) {
    for (int j = 0; j < arr.cols; ++j) {
      CellBias& b = grid[static_cast<std::size_t>(i) * arr.cols + j];
      bool sel_row = (i == row), sel_col = (j == col);
      b.cls = (sel_row && sel_col) ? SelClass::Selected
              : (sel_row || sel_col) ? SelClass::HalfSelected
                                     : SelClass::Unselected;
      if (arr.topology == Topology::T3_1F) {
        // select transistors isolate everything but the addressed cell
        if (b.cls == SelClass::Selected) {
          b.v_g = lv.wl_sel;
          b.v_d = lv.bl_sel;
          b.v_s = lv.sl_sel;
        }
        continue;
      }
      b.v_g = sel_row ? lv.wl_sel : lv.wl_oth;
      b.v_d = sel_col ? lv.bl_sel : lv.bl_oth;
      b.v_s = sel_col ? lv.sl_sel : lv.sl_oth;
    }
  }
  return grid;
}

namespace {

std::pair<double, double> raw_thresholds(const ArrayModel& arr, const DeviceState& dev) {
  auto r = read_cell(dev, arr.v_read, arr.reference_vt, arr.read);
  return {r.vt_dr, r.vt_sr};
}

}  // namespace

void array_execute_pulse(ArrayModel& arr, int row, int col, PulseKind kind) {
  auto grid = bias_map(arr, row, col, kind);
  LineLevels lv = levels_for(kind, arr.scheme, arr.write);
  ++arr.event_count;
  if (arr.stationary.size() != arr.cells.size()) arr.stationary.resize(arr.cells.size());
  for (int i = 0; i < arr.rows; ++i) {
    for (int j = 0; j < arr.cols; ++j) {
      std::size_t idx = static_cast<std::size_t>(i) * arr.cols + j;
      const CellBias& b = grid[idx];
      if (b.v_g == 0.0 && b.v_d == 0.0 && b.v_s == 0.0 && b.v_b == 0.0)
        continue;  // zero drop, exact identity
      DeviceState& dev = arr.cell(i, j);
      auto& st = arr.stationary[idx];
      if (st.valid && st.kind == kind && st.v_g == b.v_g && st.v_d == b.v_d &&
          st.v_s == b.v_s && st.v_b == b.v_b && st.state == dev)
        continue;  // this event already proved to map the state onto itself
      PulseWaveform wf;
      wf.label = std::string(to_string(kind)) + "@" + to_string(b.cls);
      wf.steps.push_back({lv.duration_s, b.v_g, b.v_d, b.v_s, b.v_b});
      wf.steps.push_back({lv.duration_s, 0, 0, 0, 0});
      DeviceState after = apply_waveform(dev, wf);
      bool changed =
          !(after.segments == dev.segments && after.worn_occ == dev.worn_occ);
      if (!changed) {
        // polarization untouched: keep the cell (and its retention clock) as is
        st = {true, kind, b.v_g, b.v_d, b.v_s, b.v_b, dev};
        continue;
      }
      if (b.cls != SelClass::Selected) {
        auto [dr0, sr0] = raw_thresholds(arr, dev);
        auto [dr1, sr1] = raw_thresholds(arr, after);
        arr.ledger.push_back({arr.event_count, i, j, b.cls, dr1 - dr0, sr1 - sr0});
      }
      st.valid = false;
      dev = std::move(after);
    }
  }
}

const char* to_string(PulseKind k) {
  switch (k) {
    case PulseKind::GatePos: return "gate+";
    case PulseKind::GateNeg: return "gate-";
    case PulseKind::DrainPulse: return "drain";
    case PulseKind::SourcePulse: return "source";
  }
  return "?";
}

ArrayModel array_execute(ArrayModel arr, int row, int col, StateLabel target) {
  for (PulseKind kind : pulses_for(target)) array_execute_pulse(arr, row, col, kind);
  return arr;
}

SenseResult sense_serial(const ArrayModel& arr, int row, int col) {
  const DeviceState& dev = arr.cell(row, col);
  SenseResult res;
  char buf[128];

  // DR phase: source line driven, bit line routed to the sense comparator
  std::snprintf(buf, sizeof(buf), "SL=%.2f V, BL->SA, WL ramp %.2f..%.2f V", arr.v_read,
                arr.read.sweep_lo_v, arr.read.sweep_hi_v);
  res.phases[0].phase = "DR";
  res.phases[0].lines = buf;
  try {
    auto c = transfer_curve(dev, ReadTerminal::Source, arr.v_read, arr.read.sweep_lo_v,
                            arr.read.sweep_hi_v, arr.read.points);
    res.phases[0].vt = extract_vt(c, dev.w_nm, dev.l_nm);
  } catch (const NoCrossingError& e) {
    throw SenseFault(std::string("sense_serial: stuck cell in DR phase: ") + e.what(), "DR");
  }
  res.phases[0].above_reference = res.phases[0].vt > arr.reference_vt;

  // SR phase: configuration swapped
  std::snprintf(buf, sizeof(buf), "BL=%.2f V, SL->SA, WL ramp %.2f..%.2f V", arr.v_read,
                arr.read.sweep_lo_v, arr.read.sweep_hi_v);
  res.phases[1].phase = "SR";
  res.phases[1].lines = buf;
  try {
    auto c = transfer_curve(dev, ReadTerminal::Drain, arr.v_read, arr.read.sweep_lo_v,
                            arr.read.sweep_hi_v, arr.read.points);
    res.phases[1].vt = extract_vt(c, dev.w_nm, dev.l_nm);
  } catch (const NoCrossingError& e) {
    throw SenseFault(std::string("sense_serial: stuck cell in SR phase: ") + e.what(), "SR");
  }
  res.phases[1].above_reference = res.phases[1].vt > arr.reference_vt;

  res.label = classify(res.phases[0].vt, res.phases[1].vt, arr.reference_vt);
  res.bits = bits_of(res.label);
  return res;
}

std::string array_image_json(const ArrayModel& arr) {
  nlohmann::json j;
  j["topology"] = to_string(arr.topology);
  j["scheme"] = to_string(arr.scheme);
  j["rows"] = arr.rows;
  j["cols"] = arr.cols;
  j["reference_vt"] = arr.reference_vt;
  j["v_read"] = arr.v_read;
  nlohmann::json cells = nlohmann::json::array();
  for (int i = 0; i < arr.rows; ++i) {
    for (int c = 0; c < arr.cols; ++c) {
      auto s = sense_serial(arr, i, c);
      cells.push_back({{"row", i},
                       {"col", c},
                       {"label", to_string(s.label)},
                       {"vt_dr", s.phases[0].vt},
                       {"vt_sr", s.phases[1].vt}});
    }
  }
  j["cells"] = std::move(cells);
  return j.dump(2);
}

ArrayModel array_image_restore(const std::string& json_text, const DeviceState& nominal) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  ArrayModel arr = ArrayModel::make(j.at("rows").get<int>(), j.at("cols").get<int>(),
                                    topology_from_string(j.at("topology").get<std::string>()),
                                    scheme_from_string(j.at("scheme").get<std::string>()),
                                    nominal, j.at("reference_vt").get<double>());
  arr.v_read = j.at("v_read").get<double>();
  for (const auto& c : j.at("cells")) {
    int r = c.at("row").get<int>(), col = c.at("col").get<int>();
    arr.cell(r, col) =
        program_state(nominal, state_from_string(c.at("label").get<std::string>()), arr.write);
  }
  return arr;
}

std::string disturb_ledger_csv(const std::vector<DisturbRow>& rows) {
  std::string out = "event,row,col,class,dvt_dr,dvt_sr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%d,%s,%.9g,%.9g\n", r.event, r.row, r.col,
                  to_string(r.cls), r.dvt_dr, r.dvt_sr);
    out += buf;
  }
  return out;
}

}  // namespace mirrorbit
