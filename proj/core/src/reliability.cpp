#include "mirrorbit/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mirrorbit {

void RetentionParams::validate() const {
  if (!(tau0_s > 0.0)) throw ParameterError("RetentionParams: tau0 must be > 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("RetentionParams: beta in (0, 1]");
  if (!(p_inf_frac >= 0.0 && p_inf_frac <= 1.0))
    throw ParameterError("RetentionParams: p_inf_frac in [0, 1]");
  if (!(ea_ev >= 0.0)) throw ParameterError("RetentionParams: ea must be >= 0");
}

double RetentionParams::tau_s(double temp_k) const {
  return tau0_s * std::exp(ea_ev / (kBoltzmannEv * temp_k));
}

double RetentionParams::factor(double s) const {
  if (s <= 0.0) return 1.0;
  return p_inf_frac + (1.0 - p_inf_frac) * std::exp(-std::pow(s, beta));
}

namespace {

// Saturated-equivalent state after back-switching: a single turning point at
// the segment's rest field holding the relaxed polarization. The leg departs
// toward the opposite rail, so the branch seen by a read is the saturated
// branch shifted by the lost polarization (an up-written segment that lost
// |P| responds above the virgin ascending branch, and vice versa).
HysteresisState relaxed_state(double p_relaxed, double p_written, double e_rest) {
  if (std::fabs(p_relaxed) < 1e-300) return HysteresisState::virgin();
  if (p_written < 0.0)
    return HysteresisState::restore(HysteresisState::Base::FromNegSat, +1,
                                    {{e_rest, p_relaxed}}, e_rest, p_relaxed);
  return HysteresisState::restore(HysteresisState::Base::FromPosSat, -1,
                                  {{e_rest, p_relaxed}}, e_rest, p_relaxed);
}

}  // namespace

DeviceState retention_evolve(DeviceState dev, double t_s, double temp_k,
                             const RetentionParams& params) {
  params.validate();
  if (t_s < 0.0) throw InputError("retention_evolve: negative time");
  if (t_s == 0.0) return dev;
  dev.retention_s += t_s / params.tau_s(temp_k);
  double f = params.factor(dev.retention_s);
  for (int k = 0; k < dev.n_seg; ++k) {
    double p_relaxed = dev.p_base[k] * f;
    dev.segments[k] =
        relaxed_state(p_relaxed, dev.p_base[k], dev.segments[k].field());
  }
  return dev;
}

void EnduranceParams::validate() const {
  if (!(nit_a >= 0.0) || !(nit_p >= 0.0) || !(onset_cycles >= 0.0))
    throw ParameterError("EnduranceParams: coefficients must be >= 0");
}

double EnduranceParams::worn_nit(double cycles) const {
  if (cycles <= 0.0) return 0.0;
  return nit_a * std::pow(cycles, nit_p);
}

std::vector<long> log_cycle_grid(long n_cycles, int per_decade) {
  std::vector<long> grid;
  double c = 1.0;
  double step = std::pow(10.0, 1.0 / per_decade);
  while (true) {
    long v = std::llround(c);
    if (v >= n_cycles) break;
    if (grid.empty() || v > grid.back()) grid.push_back(v);
    c *= step;
  }
  if (grid.empty() || grid.back() != n_cycles) grid.push_back(n_cycles);
  return grid;
}

namespace {

EndurancePoint sample_states(const DeviceState& dev, long cycle, const WriteSettings& ws) {
  EndurancePoint pt;
  pt.cycle = cycle;
  for (int i = 0; i < 4; ++i) {
    auto r = read_cell(program_state(dev, kTraceStates[i], ws), 1.5, 0.0);
    pt.vt_dr[i] = r.vt_dr;
    pt.vt_sr[i] = r.vt_sr;
  }
  return pt;
}

}  // namespace

EnduranceResult endurance_run(DeviceState dev, long n_cycles, const EnduranceParams& params,
                              const WriteSettings& ws, const std::vector<long>& checkpoints) {
  params.validate();
  if (n_cycles < 1) throw InputError("endurance_run: n_cycles must be >= 1");
  std::vector<long> grid = checkpoints.empty() ? log_cycle_grid(n_cycles) : checkpoints;

  PulseWaveform up = waveform_for(StateLabel::UWL, ws);
  PulseWaveform down = waveform_for(StateLabel::UWH, ws);
  auto one_cycle = [&](DeviceState d) { return apply_waveform(apply_waveform(d, up), down); };

  EnduranceResult res;
  res.trace.reserve(grid.size());

  // probe whether one cycle is a fixed point of the polarization state (the
  // saturating default pair is); then only the degradation law advances
  dev.worn_nit_cm2 = params.worn_nit(1.0);
  DeviceState after1 = one_cycle(dev);
  DeviceState after2 = one_cycle(after1);
  bool stationary = after1.segments == after2.segments && after1.worn_occ == after2.worn_occ;

  long cycle = 2;
  DeviceState cur = after2;
  std::size_t gi = 0;
  while (gi < grid.size() && grid[gi] < cycle) {
    // checkpoints at 1 or 2 cycles
    DeviceState snap = (grid[gi] == 1) ? after1 : cur;
    snap.worn_nit_cm2 = params.worn_nit(grid[gi]);
    res.trace.push_back(sample_states(snap, grid[gi], ws));
    ++gi;
  }
  for (; gi < grid.size(); ++gi) {
    long target = grid[gi];
    if (stationary) {
      cur.worn_nit_cm2 = params.worn_nit(target);
      cur = one_cycle(cur);  // refresh at the current degradation level
      cycle = target;
    } else {
      for (; cycle < target; ++cycle) {
        cur.worn_nit_cm2 = params.worn_nit(cycle + 1);
        cur = one_cycle(cur);
      }
    }
    res.trace.push_back(sample_states(cur, target, ws));
  }
  res.final = std::move(cur);
  return res;
}

std::string reliability_trace_csv(const std::vector<ReliabilityTraceRow>& rows) {
  std::string out = "cycle_or_time,temp_k,state,vt_dr,vt_sr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%s,%.9g,%.9g\n", r.cycle_or_time, r.temp_k,
                  to_string(r.state), r.vt_dr, r.vt_sr);
    out += buf;
  }
  return out;
}

}  // namespace mirrorbit
