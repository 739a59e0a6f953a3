#include "mirrorbit/electrostatics.hpp"

#include <algorithm>
#include <cmath>

#include "mirrorbit/rootfind.hpp"

namespace mirrorbit {

namespace {

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

void StackParams::validate() const {
  ferro.validate();
  if (!(t_fe_nm > 0.0 && t_ox_nm > 0.0)) throw ParameterError("StackParams: thicknesses must be > 0");
  if (!(eps_fe > 1.0 && eps_ox > 1.0 && eps_si > 1.0))
    throw ParameterError("StackParams: relative permittivities must exceed 1");
  if (!(na_cm3 > ni_cm3)) throw ParameterError("StackParams: requires na > ni");
  if (!(nit_cm2 >= 0.0)) throw ParameterError("StackParams: nit must be >= 0");
  if (!(temp_k > 0.0 && ni_cm3 > 0.0)) throw ParameterError("StackParams: bad temp/ni");
  if (!(bandgap_ev > 0.0)) throw ParameterError("StackParams: bad bandgap");
}

double StackParams::phi_f() const { return vt_th() * std::log(na_cm3 / ni_cm3); }

double StackParams::q_trap_full_uc() const {
  return kElementaryCharge * nit_cm2 * 1e6;
}

double StackParams::c_fe_uc() const { return kEps0Uc * eps_fe / (kNmMvToVolt * t_fe_nm); }
double StackParams::c_ox_uc() const { return kEps0Uc * eps_ox / (kNmMvToVolt * t_ox_nm); }

double StackParams::c_stack_uc() const {
  double cf = c_fe_uc(), co = c_ox_uc();
  return cf * co / (cf + co);
}

double StackParams::c_dep_uc() const {
  double w_cm = std::sqrt(2.0 * eps_si * kEps0FPerCm * 2.0 * phi_f() /
                          (kElementaryCharge * na_cm3));
  return eps_si * kEps0FPerCm / w_cm * 1e6;
}

double StackParams::c_it_uc() const { return q_trap_full_uc() / bandgap_ev; }

double StackParams::ideality_n() const {
  return 1.0 + (c_dep_uc() + c_it_uc()) / c_stack_uc();
}

double semiconductor_charge(double psi_s, double v_ch, const StackParams& sp) {
  double vt = sp.vt_th();
  double u = psi_s / vt;
  if (u == 0.0) return 0.0;
  double two_phi_f = 2.0 * sp.phi_f();
  // hole + depletion part
  double hole = std::exp(std::min(-u, 700.0)) + u - 1.0;
  // electron part, written via exp((psi - v_ch - 2 phi_f)/vt) to stay finite
  double el = std::exp(std::min((psi_s - v_ch - two_phi_f) / vt, 700.0)) -
              std::exp(std::min((-v_ch - two_phi_f) / vt, 700.0));
  double nb_ratio = (sp.ni_cm3 / sp.na_cm3) * (sp.ni_cm3 / sp.na_cm3);
  double bracket = hole + el - nb_ratio * u;
  if (bracket < 0.0) bracket = 0.0;
  double q0 = std::sqrt(2.0 * kElementaryCharge * kEps0FPerCm * sp.eps_si * sp.na_cm3 * vt) * 1e6;
  return (u > 0.0 ? -1.0 : 1.0) * q0 * std::sqrt(bracket);
}

double trap_occupancy(double psi_s, const StackParams& sp) {
  double vt = sp.vt_th();
  double eg = sp.bandgap_ev;
  double xv = (0.5 * eg + psi_s - sp.phi_f()) / vt;  // E_f - E_v at the surface
  double xc = xv - eg / vt;
  double filled_ev = vt * (log1pexp(xv) - log1pexp(xc));
  return std::clamp(filled_ev / eg, 0.0, 1.0);
}

double trap_charge(double psi_s, const StackParams& sp) {
  return -sp.q_trap_full_uc() * trap_occupancy(psi_s, sp);
}

namespace {

struct ColumnEval {
  double q_sc, q_it_rel, d_uc, e_ox, e_fe, p, v_ox, v_fe, fe_residual;
};

// field in the ferroelectric from displacement continuity at fixed D
double solve_fe_field(double d_uc, const HysteresisState& hist, const StackParams& sp,
                      double* p_out, double* res_out) {
  double c = kEps0Uc * sp.eps_fe;
  auto f = [&](double e) { return c * e + hist.branch_eval(e, sp.ferro) - d_uc; };
  // relative slack keeps the bracket nonempty for the huge |d| probed while
  // the outer solve expands its own bracket
  double slack = 1.0 + 1e-9 * std::fabs(d_uc) / c;
  double lo = (d_uc - sp.ferro.ps) / c - slack;
  double hi = (d_uc + sp.ferro.ps) / c + slack;
  double e = find_root(f, lo, hi, RootOptions{1e-15, 300, false});
  double p = hist.branch_eval(e, sp.ferro);
  if (p_out) *p_out = p;
  if (res_out) *res_out = std::fabs(c * e + p - d_uc) / std::max(1.0, std::fabs(d_uc));
  return e;
}

ColumnEval eval_column(double psi_s, double v_ch, const HysteresisState& hist,
                       const StackParams& sp, double q_worn_uc, double occ0) {
  ColumnEval ev{};
  ev.q_sc = semiconductor_charge(psi_s, v_ch, sp);
  ev.q_it_rel = -sp.q_trap_full_uc() * (trap_occupancy(psi_s, sp) - occ0);
  ev.d_uc = -(ev.q_sc + ev.q_it_rel + q_worn_uc);
  ev.e_ox = ev.d_uc / (kEps0Uc * sp.eps_ox);
  ev.e_fe = solve_fe_field(ev.d_uc, hist, sp, &ev.p, &ev.fe_residual);
  ev.v_ox = kNmMvToVolt * sp.t_ox_nm * ev.e_ox;
  ev.v_fe = kNmMvToVolt * sp.t_fe_nm * ev.e_fe;
  return ev;
}

}  // namespace

SegmentSolution solve_vertical_stack(double v_g, double v_ch, const HysteresisState& hist,
                                     const StackParams& sp, double q_worn_uc,
                                     const VerticalSolveOptions& opt) {
  if (!std::isfinite(v_g) || !std::isfinite(v_ch))
    throw InputError("solve_vertical_stack: non-finite bias");
  double occ0 = trap_occupancy(0.0, sp);
  double drive = v_g - sp.vfb_v - v_ch;
  auto resid = [&](double psi) {
    ColumnEval ev = eval_column(psi, v_ch, hist, sp, q_worn_uc, occ0);
    return drive - psi - ev.v_ox - ev.v_fe;
  };
  // R is strictly decreasing in psi; bracket with expansion
  double lo = -2.0, hi = 2.0 * sp.phi_f() + std::max(0.0, v_ch) + 2.0;
  double flo = resid(lo), fhi = resid(hi);
  for (int k = 0; k < 8 && flo < 0.0; ++k) {
    lo -= 1.0;
    flo = resid(lo);
  }
  for (int k = 0; k < 8 && fhi > 0.0; ++k) {
    hi += 2.0;
    fhi = resid(hi);
  }
  if (flo < 0.0 || fhi > 0.0)
    throw ConvergenceError("solve_vertical_stack: no bracketing sign change", std::min(flo, -fhi));
  RootOptions ro;
  ro.x_tol = opt.rel_tol * 0.01;
  ro.max_iter = 300;
  ro.bisection_only = opt.bisection_only;
  double psi = find_root(resid, lo, hi, flo, fhi, ro);

  ColumnEval ev = eval_column(psi, v_ch, hist, sp, q_worn_uc, occ0);
  SegmentSolution sol;
  sol.psi_s = psi;
  sol.e_fe = ev.e_fe;
  sol.p = ev.p;
  sol.q_sc = ev.q_sc;
  sol.q_it = ev.q_it_rel;
  sol.e_ox = ev.e_ox;
  sol.fe_residual = ev.fe_residual;
  sol.residual = std::fabs(drive - psi - ev.v_ox - ev.v_fe) / std::max(1.0, std::fabs(drive));
  if (sol.residual > 1e-10)
    throw ConvergenceError("solve_vertical_stack: residual above tolerance", sol.residual);
  return sol;
}

double segment_threshold(const HysteresisState& hist, double v_ch, const StackParams& sp,
                         double q_worn_uc) {
  double occ0 = trap_occupancy(0.0, sp);
  double psi_t = 2.0 * sp.phi_f() + v_ch;
  ColumnEval ev = eval_column(psi_t, v_ch, hist, sp, q_worn_uc, occ0);
  double vt = sp.vfb_v + v_ch + psi_t + ev.v_ox + ev.v_fe;
  if (vt < -5.0 || vt > 5.0)
    throw RangeError("segment_threshold: threshold outside [-5, 5] V");
  return vt;
}

}  // namespace mirrorbit
