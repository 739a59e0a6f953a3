#pragma once

#include <vector>

#include "mirrorbit/programming.hpp"

namespace mirrorbit {

/// Stretched-exponential retention with Arrhenius time scaling.
struct RetentionParams {
  double tau0_s = 1e-4;     // attempt time
  double ea_ev = 0.55;      // activation energy
  double beta = 0.4;        // stretch exponent
  double p_inf_frac = 0.55; // polarization fraction retained at infinite time

  void validate() const;
  double tau_s(double temp_k) const;
  /// decay factor at accumulated scaled time s = sum(t_i / tau(T_i))
  double factor(double s) const;
};

/// Relaxes every segment's remanent polarization toward p_inf_frac * P as
///   P(t) = P_write * [p_inf + (1 - p_inf) exp(-((t_eff)/tau(T))^beta)]
/// accumulating bake time in scaled units, so successive evolves compose
/// exactly. The hysteresis history is replaced by a saturated-equivalent
/// state (one virtual reverse excursion) holding the relaxed polarization.
/// t = 0 is a bitwise identity; negative t throws InputError.
DeviceState retention_evolve(DeviceState dev, double t_s, double temp_k,
                             const RetentionParams& params = {});

/// Interface degradation: worn_nit(n) = nit_a * n^nit_p slow traps whose
/// occupancy is latched by each program pulse (so the low-threshold state,
/// written with the surface inverted, collects the full charge).
struct EnduranceParams {
  double nit_a = 2.4e7;
  double nit_p = 1.2;
  double onset_cycles = 2000;  // where the drift becomes visible, informational

  void validate() const;
  double worn_nit(double cycles) const;
};

struct EndurancePoint {
  long cycle = 0;
  // per state, indexed by StateLabel bits would be sparse; keep explicit order
  double vt_dr[4] = {0, 0, 0, 0};  // UWH, UWL, SW, DW
  double vt_sr[4] = {0, 0, 0, 0};
};

inline constexpr StateLabel kTraceStates[4] = {StateLabel::UWH, StateLabel::UWL,
                                               StateLabel::SW, StateLabel::DW};

struct EnduranceResult {
  DeviceState final;
  std::vector<EndurancePoint> trace;
};

/// Applies the +-gate pulse pair per cycle and grows the worn trap density;
/// thresholds of all four states are sampled on a logarithmic cycle grid
/// (programmed on copies of the cycled device). When one cycle maps the
/// state onto itself (the default saturating pair does), the remaining
/// cycles advance only the degradation law, which is exact.
EnduranceResult endurance_run(DeviceState dev, long n_cycles,
                              const EnduranceParams& params = {},
                              const WriteSettings& ws = {},
                              const std::vector<long>& checkpoints = {});

std::vector<long> log_cycle_grid(long n_cycles, int per_decade = 4);

struct ReliabilityTraceRow {
  double cycle_or_time;
  double temp_k;
  StateLabel state;
  double vt_dr;
  double vt_sr;
};

/// CSV rows: header `cycle_or_time,temp_k,state,vt_dr,vt_sr`.
std::string reliability_trace_csv(const std::vector<ReliabilityTraceRow>& rows);

}  // namespace mirrorbit
