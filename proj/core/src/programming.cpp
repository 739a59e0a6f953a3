#include "mirrorbit/programming.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

namespace mirrorbit {

const char* to_string(StateLabel s) {
  switch (s) {
    case StateLabel::UWH: return "UWH";
    case StateLabel::UWL: return "UWL";
    case StateLabel::SW: return "SW";
    case StateLabel::DW: return "DW";
  }
  return "?";
}

StateLabel state_from_string(const std::string& name) {
  if (name == "UWH") return StateLabel::UWH;
  if (name == "UWL") return StateLabel::UWL;
  if (name == "SW") return StateLabel::SW;
  if (name == "DW") return StateLabel::DW;
  throw InputError("unknown state label: " + name);
}

std::string bits_string(StateLabel s) {
  uint8_t b = bits_of(s);
  return {static_cast<char>('0' + ((b >> 1) & 1)), static_cast<char>('0' + (b & 1))};
}

namespace {

bool waveform_is_zero(const PulseWaveform& wf) {
  for (const auto& st : wf.steps)
    if (st.v_g != 0.0 || st.v_d != 0.0 || st.v_s != 0.0 || st.v_b != 0.0) return false;
  return true;
}

void commit_bias(DeviceState& dev, const BiasPoint& b) {
  double vg = b.v_g - b.v_b;
  // a forward-biased source/drain junction clamps the channel potential
  double v0 = std::max(b.v_s - b.v_b, -dev.junction_fwd_clamp_v);
  double v1 = std::max(b.v_d - b.v_b, -dev.junction_fwd_clamp_v);
  std::vector<double> v_ch(dev.n_seg);
  if (dev.write_profile == WriteProfile::Linear) {
    for (int k = 0; k < dev.n_seg; ++k) {
      double x = dev.x_center_nm(k) / dev.l_nm;
      v_ch[k] = v0 + (v1 - v0) * x;
    }
  } else {
    // live subthreshold transport profile: concentrates the drop near the
    // high-voltage junction; self-consistency builds up across substeps
    ChannelSolution sol = solve_channel(dev, b);
    for (int k = 0; k < dev.n_seg; ++k)
      v_ch[k] = 0.5 * (sol.node_v[k] + sol.node_v[k + 1]);
  }
  for (int k = 0; k < dev.n_seg; ++k) {
    SegmentSolution sol;
    try {
      sol = solve_vertical_stack(vg, v_ch[k], dev.segments[k], dev.stack, dev.q_worn_uc(k));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("apply_waveform: segment " + std::to_string(k) +
                                 " failed to converge: " + e.what(),
                             e.residual);
    }
    dev.segments[k].apply_field(sol.e_fe, dev.stack.ferro);
    dev.worn_occ[k] = trap_occupancy(sol.psi_s, dev.stack);
  }
}

}  // namespace

DeviceState apply_waveform(DeviceState dev, const PulseWaveform& wf) {
  dev.validate();
  for (const auto& st : wf.steps) {
    if (!(st.duration_s > 0.0)) throw InputError("apply_waveform: step duration must be > 0");
    if (!std::isfinite(st.v_g) || !std::isfinite(st.v_d) || !std::isfinite(st.v_s) ||
        !std::isfinite(st.v_b))
      throw InputError("apply_waveform: non-finite step voltage");
  }
  if (wf.steps.empty() || waveform_is_zero(wf)) return dev;  // exact identity

  BiasPoint prev{};  // waveforms are applied from rest
  int nsub = std::max(1, dev.write_substeps);
  for (const auto& st : wf.steps) {
    BiasPoint target{st.v_g, st.v_d, st.v_s, st.v_b};
    for (int s = 1; s <= nsub; ++s) {
      double f = static_cast<double>(s) / nsub;
      BiasPoint b{prev.v_g + (target.v_g - prev.v_g) * f,
                  prev.v_d + (target.v_d - prev.v_d) * f,
                  prev.v_s + (target.v_s - prev.v_s) * f,
                  prev.v_b + (target.v_b - prev.v_b) * f};
      commit_bias(dev, b);
    }
    prev = target;
  }
  // a write resets the retention clock and baseline
  for (int k = 0; k < dev.n_seg; ++k) dev.p_base[k] = dev.segments[k].polarization();
  dev.retention_s = 0.0;
  return dev;
}

PulseWaveform waveform_for(StateLabel target, const WriteSettings& ws) {
  PulseWaveform wf;
  wf.label = to_string(target);
  PulseStep rest;
  rest.duration_s = ws.gate_width_s;
  switch (target) {
    case StateLabel::UWL:
      wf.steps.push_back({ws.gate_width_s, +ws.gate_amp_v, 0, 0, 0});
      wf.steps.push_back(rest);
      break;
    case StateLabel::UWH:
      wf.steps.push_back({ws.gate_width_s, -ws.gate_amp_v, 0, 0, 0});
      wf.steps.push_back(rest);
      break;
    case StateLabel::SW:
      wf.steps.push_back({ws.gate_width_s, +ws.gate_amp_v, 0, 0, 0});
      wf.steps.push_back(rest);
      wf.steps.push_back({ws.terminal_width_s, 0, 0, ws.terminal_amp_v, 0});
      wf.steps.push_back(rest);
      break;
    case StateLabel::DW:
      wf.steps.push_back({ws.gate_width_s, +ws.gate_amp_v, 0, 0, 0});
      wf.steps.push_back(rest);
      wf.steps.push_back({ws.terminal_width_s, 0, ws.terminal_amp_v, 0, 0});
      wf.steps.push_back(rest);
      break;
  }
  return wf;
}

DeviceState program_state(DeviceState dev, StateLabel target, const WriteSettings& ws) {
  return apply_waveform(std::move(dev), waveform_for(target, ws));
}

StateLabel classify(double vt_dr, double vt_sr, double reference_vt) {
  if (!std::isfinite(vt_dr) || !std::isfinite(vt_sr) || !std::isfinite(reference_vt))
    throw InputError("classify: non-finite threshold");
  bool dr_hi = vt_dr > reference_vt;  // ties count as low
  bool sr_hi = vt_sr > reference_vt;
  if (dr_hi && sr_hi) return StateLabel::UWH;
  if (!dr_hi && !sr_hi) return StateLabel::UWL;
  return dr_hi ? StateLabel::DW : StateLabel::SW;
}

ReadResult read_cell(const DeviceState& dev, double v_read, double reference_vt,
                     const ReadSettings& rs) {
  if (!(v_read > 0.0)) throw InputError("read_cell: v_read must be > 0");
  ReadResult r;
  r.reference_vt = reference_vt;
  try {
    auto c_sr = transfer_curve(dev, ReadTerminal::Drain, v_read, rs.sweep_lo_v, rs.sweep_hi_v,
                               rs.points);
    r.vt_sr = extract_vt(c_sr, dev.w_nm, dev.l_nm);
  } catch (const NoCrossingError& e) {
    throw NoCrossingError(std::string("read_cell: stuck in the SR phase: ") + e.what());
  }
  try {
    auto c_dr = transfer_curve(dev, ReadTerminal::Source, v_read, rs.sweep_lo_v, rs.sweep_hi_v,
                               rs.points);
    r.vt_dr = extract_vt(c_dr, dev.w_nm, dev.l_nm);
  } catch (const NoCrossingError& e) {
    throw NoCrossingError(std::string("read_cell: stuck in the DR phase: ") + e.what());
  }
  r.label = classify(r.vt_dr, r.vt_sr, reference_vt);
  return r;
}

double uw_midpoint_reference(const DeviceState& nominal, double v_read, const ReadSettings& rs) {
  auto low = read_cell(program_state(nominal, StateLabel::UWL), v_read, 0.0, rs);
  auto high = read_cell(program_state(nominal, StateLabel::UWH), v_read, 0.0, rs);
  return 0.25 * (low.vt_dr + low.vt_sr + high.vt_dr + high.vt_sr);
}

std::vector<DeviceState> sample_device_variation(const DeviceState& nominal,
                                                 const SigmaSpec& sigma, uint64_t seed,
                                                 int n) {
  if (n < 1) throw InputError("sample_device_variation: n must be >= 1");
  if (sigma.pr_rel < 0 || sigma.ec_rel < 0 || sigma.vfb_abs_v < 0 || sigma.nit_rel < 0)
    throw ParameterError("sample_device_variation: sigmas must be >= 0");
  // a +-3 sigma draw must not be able to leave the physical range
  if (3.0 * sigma.pr_rel >= 1.0 || 3.0 * sigma.ec_rel >= 1.0 || 3.0 * sigma.nit_rel > 1.0)
    throw ParameterError("sample_device_variation: sigma admits non-physical parameters");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto trunc = [&]() {
    for (;;) {
      double z = normal(rng);
      if (std::fabs(z) <= 3.0) return z;
    }
  };
  std::vector<DeviceState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    DeviceState dev = nominal;
    double p_scale = 1.0 + sigma.pr_rel * trunc();
    double ec_scale = 1.0 + sigma.ec_rel * trunc();
    double vfb_shift = sigma.vfb_abs_v * trunc();
    double nit_scale = 1.0 + sigma.nit_rel * trunc();
    if (!(p_scale > 0.0) || !(ec_scale > 0.0) || !(nit_scale >= 0.0))
      throw ParameterError("sample_device_variation: draw outside physical range");
    const FerroParams& f0 = nominal.stack.ferro;
    dev.stack.ferro = FerroParams::make(f0.pr * p_scale, f0.ps * p_scale, f0.ec * ec_scale);
    dev.stack.vfb_v = nominal.stack.vfb_v + vfb_shift;
    dev.stack.nit_cm2 = nominal.stack.nit_cm2 * nit_scale;
    dev.stack.validate();
    dev.validate();
    out.push_back(std::move(dev));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON state dump / restore
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json hist_to_json(const HysteresisState& h) {
  json tps = json::array();
  for (const auto& tp : h.turning_points()) tps.push_back({tp.e, tp.p});
  return json{{"base", static_cast<int>(h.base())},
              {"dir", h.direction()},
              {"tps", std::move(tps)},
              {"e", h.field()},
              {"p", h.polarization()}};
}

HysteresisState hist_from_json(const json& j) {
  std::vector<TurningPoint> tps;
  for (const auto& tp : j.at("tps")) tps.push_back({tp.at(0).get<double>(), tp.at(1).get<double>()});
  return HysteresisState::restore(static_cast<HysteresisState::Base>(j.at("base").get<int>()),
                                  j.at("dir").get<int>(), std::move(tps),
                                  j.at("e").get<double>(), j.at("p").get<double>());
}

}  // namespace

std::string device_to_json(const DeviceState& dev) {
  json j;
  j["geometry"] = {{"l_nm", dev.l_nm}, {"w_nm", dev.w_nm}, {"n_seg", dev.n_seg}};
  const StackParams& sp = dev.stack;
  j["stack"] = {{"pr", sp.ferro.pr},       {"ps", sp.ferro.ps},
                {"ec", sp.ferro.ec},       {"delta", sp.ferro.delta},
                {"t_fe_nm", sp.t_fe_nm},   {"t_ox_nm", sp.t_ox_nm},
                {"eps_fe", sp.eps_fe},     {"eps_ox", sp.eps_ox},
                {"eps_si", sp.eps_si},     {"na_cm3", sp.na_cm3},
                {"nit_cm2", sp.nit_cm2},   {"vfb_v", sp.vfb_v},
                {"temp_k", sp.temp_k},     {"ni_cm3", sp.ni_cm3},
                {"bandgap_ev", sp.bandgap_ev}};
  j["model"] = {{"mobility_cm2_vs", dev.mobility_cm2_vs},
                {"junction_screen_scale", dev.junction_screen_scale},
                {"junction_screen_v0_v", dev.junction_screen_v0_v},
                {"junction_phi_bi_v", dev.junction_phi_bi_v},
                {"current_floor_a", dev.current_floor_a},
                {"write_substeps", dev.write_substeps},
                {"write_profile", dev.write_profile == WriteProfile::Linear ? "linear" : "transport"}};
  j["worn_nit_cm2"] = dev.worn_nit_cm2;
  j["worn_occ"] = dev.worn_occ;
  j["p_base"] = dev.p_base;
  j["retention_s"] = dev.retention_s;
  json segs = json::array();
  for (const auto& s : dev.segments) segs.push_back(hist_to_json(s));
  j["segments"] = std::move(segs);
  return j.dump(2);
}

DeviceState device_from_json(const std::string& text) {
  json j = json::parse(text);
  DeviceState dev;
  dev.l_nm = j.at("geometry").at("l_nm").get<double>();
  dev.w_nm = j.at("geometry").at("w_nm").get<double>();
  dev.n_seg = j.at("geometry").at("n_seg").get<int>();
  const auto& st = j.at("stack");
  dev.stack.ferro.pr = st.at("pr").get<double>();
  dev.stack.ferro.ps = st.at("ps").get<double>();
  dev.stack.ferro.ec = st.at("ec").get<double>();
  dev.stack.ferro.delta = st.at("delta").get<double>();
  dev.stack.t_fe_nm = st.at("t_fe_nm").get<double>();
  dev.stack.t_ox_nm = st.at("t_ox_nm").get<double>();
  dev.stack.eps_fe = st.at("eps_fe").get<double>();
  dev.stack.eps_ox = st.at("eps_ox").get<double>();
  dev.stack.eps_si = st.at("eps_si").get<double>();
  dev.stack.na_cm3 = st.at("na_cm3").get<double>();
  dev.stack.nit_cm2 = st.at("nit_cm2").get<double>();
  dev.stack.vfb_v = st.at("vfb_v").get<double>();
  dev.stack.temp_k = st.at("temp_k").get<double>();
  dev.stack.ni_cm3 = st.at("ni_cm3").get<double>();
  dev.stack.bandgap_ev = st.at("bandgap_ev").get<double>();
  const auto& mo = j.at("model");
  dev.mobility_cm2_vs = mo.at("mobility_cm2_vs").get<double>();
  dev.junction_screen_scale = mo.at("junction_screen_scale").get<double>();
  dev.junction_screen_v0_v = mo.at("junction_screen_v0_v").get<double>();
  dev.junction_phi_bi_v = mo.at("junction_phi_bi_v").get<double>();
  dev.current_floor_a = mo.at("current_floor_a").get<double>();
  dev.write_substeps = mo.at("write_substeps").get<int>();
  dev.write_profile = mo.at("write_profile").get<std::string>() == "transport"
                          ? WriteProfile::Transport
                          : WriteProfile::Linear;
  dev.worn_nit_cm2 = j.at("worn_nit_cm2").get<double>();
  dev.worn_occ = j.at("worn_occ").get<std::vector<double>>();
  dev.p_base = j.at("p_base").get<std::vector<double>>();
  dev.retention_s = j.at("retention_s").get<double>();
  dev.segments.clear();
  for (const auto& s : j.at("segments")) dev.segments.push_back(hist_from_json(s));
  dev.validate();
  return dev;
}

}  // namespace mirrorbit
