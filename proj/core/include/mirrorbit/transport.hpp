#pragma once

#include <string>
#include <vector>

#include "mirrorbit/electrostatics.hpp"

namespace mirrorbit {

enum class WriteProfile { Linear, Transport };

/// Full FeFET: geometry, vertical stack, and one hysteresis state per
/// lateral segment (index 0 adjacent to the source terminal).
struct DeviceState {
  double l_nm = 240.0;
  double w_nm = 240.0;
  int n_seg = 24;
  std::vector<HysteresisState> segments;
  StackParams stack;

  // endurance bookkeeping: generated slow traps and their occupancy latched
  // at the last committed program step
  double worn_nit_cm2 = 0.0;
  std::vector<double> worn_occ;

  // retention bookkeeping: per-segment polarization at the last write and
  // the accumulated scaled bake time
  std::vector<double> p_base;
  double retention_s = 0.0;

  // transport / write model knobs
  double mobility_cm2_vs = 100.0;
  double junction_screen_scale = 0.86;  // screening cap / zero-bias depletion length
  double junction_screen_v0_v = 0.35;   // bias scale of the screening onset
  double junction_phi_bi_v = 0.9;
  double junction_fwd_clamp_v = 0.7;  // forward-biased junctions pin the channel
  double current_floor_a = 1e-14;
  int write_substeps = 8;
  WriteProfile write_profile = WriteProfile::Linear;

  static DeviceState nominal();
  void validate() const;

  double seg_len_nm() const { return l_nm / n_seg; }
  double x_center_nm(int k) const { return (k + 0.5) * seg_len_nm(); }
  /// latched worn-trap sheet charge for segment k, uC/cm^2 (<= 0)
  double q_worn_uc(int k) const;

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

struct BiasPoint {
  double v_g = 0.0, v_d = 0.0, v_s = 0.0, v_b = 0.0;
  friend bool operator==(const BiasPoint&, const BiasPoint&) = default;
};

enum class ReadTerminal { Drain, Source };

struct TransferCurvePoint {
  double vg;
  double i;  // A, absolute value of the read-terminal current plus floor
};

struct TransferCurve {
  std::vector<TransferCurvePoint> points;
  ReadTerminal read_terminal = ReadTerminal::Drain;
  double v_read = 0.1;
};

struct ChannelSolution {
  std::vector<double> node_v;      // n_seg + 1 channel potentials, source first
  double i_d = 0.0;                // conventional current into the drain, A
  double i_s = 0.0;                // = -i_d
  std::vector<double> psi_profile; // per-segment surface potential (optional)
  double spread = 0.0;             // max segment-current imbalance, relative
  int iterations = 0;
  bool used_fallback = false;
};

struct ChannelSolveOptions {
  bool want_psi_profile = false;
  bool force_shooting = false;  // skip Newton, use the nested-bisection path
  double spread_tol = 1e-7;
  // frozen per-segment thresholds (one segment_threshold call each); sweeps
  // reuse them across points instead of re-deriving identical values
  const std::vector<double>* vt_local = nullptr;
};

/// Per-segment local thresholds at zero channel bias (frozen branch).
std::vector<double> local_thresholds(const DeviceState& dev);

/// Junction depletion reach from a terminal at reverse bias v (>= 0), nm.
/// Zero at zero bias, saturating toward the calibrated cap: segments inside
/// this reach are carrier-swept, which masks a stored barrier adjacent to
/// the driven terminal (the reverse-read mechanism behind the two-bit cell).
double junction_screen_len_nm(double v, const DeviceState& dev);

/// Series solve of the segment chain at one bias point: all segment currents
/// equal (relative spread <= 1e-6), node potentials monotone between the
/// terminal values. Segments inside a driven junction's depletion reach are
/// carrier-swept and drop out of the gate-limited chain.
ChannelSolution solve_channel(const DeviceState& dev, const BiasPoint& bias,
                              const ChannelSolveOptions& opt = {});

/// Frozen-polarization gate sweep; one solve_channel call per point.
TransferCurve transfer_curve(const DeviceState& dev, ReadTerminal read_terminal,
                             double v_read, double vg_lo, double vg_hi, int n_pts);

/// Constant-current threshold: V_G where the curve crosses 1 uA * (W/L),
/// log-linear interpolation between bracketing samples; lowest crossing wins.
/// Throws NoCrossingError when the curve never reaches the level.
double extract_vt(const TransferCurve& curve, double w_nm, double l_nm);

/// CSV rows: header `vg,i,terminal,vread`, SI units.
std::string curve_to_csv(const TransferCurve& curve);

}  // namespace mirrorbit
