#pragma once

#include "mirrorbit/constants.hpp"
#include "mirrorbit/errors.hpp"
#include "mirrorbit/preisach.hpp"

namespace mirrorbit {

/// Vertical MFIS stack parameters for one lateral segment.
struct StackParams {
  FerroParams ferro = FerroParams::make(5.99, 6.0, 0.7);
  double t_fe_nm = 10.0;
  double t_ox_nm = 0.5;
  double eps_fe = 30.0;
  double eps_ox = 3.9;
  double eps_si = 11.7;
  double na_cm3 = 3e16;     // channel acceptor doping
  double nit_cm2 = 2.7e12;  // interface trap density
  double vfb_v = -0.3;      // flat band, workfunction/fixed-charge knob
  double temp_k = 300.0;
  double ni_cm3 = 1e10;
  double bandgap_ev = 1.12;

  void validate() const;
  friend bool operator==(const StackParams&, const StackParams&) = default;

  double vt_th() const { return thermal_voltage(temp_k); }
  double phi_f() const;            // bulk Fermi potential, V
  double q_trap_full_uc() const;   // q * nit, uC/cm^2
  double c_fe_uc() const;          // uC/(cm^2 V)
  double c_ox_uc() const;
  double c_stack_uc() const;       // series fe + interlayer
  double c_dep_uc() const;         // depletion capacitance at psi = 2 phi_f
  double c_it_uc() const;          // trap capacitance q*nit/Eg
  double ideality_n() const;       // 1 + (c_dep + c_it)/c_stack
};

/// Converged state of one vertical column.
struct SegmentSolution {
  double psi_s = 0.0;   // surface potential, V
  double e_fe = 0.0;    // ferroelectric field, MV/cm
  double p = 0.0;       // polarization on the current branch, uC/cm^2
  double q_sc = 0.0;    // semiconductor sheet charge, uC/cm^2
  double q_it = 0.0;    // trap sheet charge relative to flat band, uC/cm^2
  double e_ox = 0.0;    // interlayer field, MV/cm
  double residual = 0.0;        // potential balance residual, V (relative)
  double fe_residual = 0.0;     // displacement continuity residual (relative)
};

/// Bulk-MOS sheet charge (uC/cm^2) vs surface potential; the inversion term
/// is suppressed by the channel quasi-Fermi shift v_ch. Q(0, 0) = 0,
/// monotone nonincreasing in psi_s, positive in accumulation.
double semiconductor_charge(double psi_s, double v_ch, const StackParams& sp);

/// Occupied fraction of the acceptor-like trap ladder (uniform over the gap,
/// equilibrium Fermi occupancy), in [0, 1].
double trap_occupancy(double psi_s, const StackParams& sp);

/// Absolute trap sheet charge -q*nit*occupancy, in (-q*nit, 0].
double trap_charge(double psi_s, const StackParams& sp);

struct VerticalSolveOptions {
  bool bisection_only = false;
  double rel_tol = 1e-12;
};

/// Solves charge balance for one column: unknown surface potential such that
///   v_g - vfb - v_ch = psi_s + E_ox t_ox + E_fe t_fe
/// with eps0 eps_fe E_fe + P(E_fe; hist) = eps0 eps_ox E_ox = -(Q_sc + Q_it + q_worn),
/// trap charge referenced to its flat-band occupancy so v_g = vfb is the
/// exact flat-band fixed point. Polarization is evaluated on the current
/// branch of `hist`; nothing is committed.
/// `q_worn_uc` is an extra latched sheet charge (endurance-generated traps).
SegmentSolution solve_vertical_stack(double v_g, double v_ch, const HysteresisState& hist,
                                     const StackParams& sp, double q_worn_uc = 0.0,
                                     const VerticalSolveOptions& opt = {});

/// Gate voltage at which psi_s reaches 2 phi_f + v_ch with polarization
/// frozen on its current branch. Closed-form once the threshold charge is
/// known; throws RangeError if the result falls outside [-5, 5] V.
double segment_threshold(const HysteresisState& hist, double v_ch, const StackParams& sp,
                         double q_worn_uc = 0.0);

}  // namespace mirrorbit
