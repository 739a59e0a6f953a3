#include "mirrorbit/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mirrorbit {

namespace {

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// EKV-style interpolation between exponential subthreshold conduction and
// the square-law triode/saturation regime.
double f_current(double u) {
  double l = log1pexp(0.5 * u);
  return l * l;
}

double f_current_deriv(double u) {
  double l = log1pexp(0.5 * u);
  double sig = 1.0 / (1.0 + std::exp(-0.5 * u));
  return l * sig;
}

// inverse of f_current on [0, inf)
double f_current_inv(double y) {
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  double r = std::sqrt(y);
  if (r > 36.0) return 2.0 * r;  // expm1 overflow region: e^r - 1 ~ e^r
  return 2.0 * std::log(std::expm1(r));
}

}  // namespace

DeviceState DeviceState::nominal() {
  DeviceState dev;
  dev.segments.assign(dev.n_seg, HysteresisState::virgin());
  dev.worn_occ.assign(dev.n_seg, 0.0);
  dev.p_base.assign(dev.n_seg, 0.0);
  return dev;
}

void DeviceState::validate() const {
  stack.validate();
  if (n_seg < 8) throw ParameterError("DeviceState: n_seg must be >= 8");
  if (!(l_nm > 0.0 && w_nm > 0.0)) throw ParameterError("DeviceState: bad geometry");
  if (segments.size() != static_cast<std::size_t>(n_seg) ||
      worn_occ.size() != segments.size() || p_base.size() != segments.size())
    throw ParameterError("DeviceState: per-segment arrays out of sync");
  if (!(worn_nit_cm2 >= 0.0)) throw ParameterError("DeviceState: worn_nit must be >= 0");
}

double DeviceState::q_worn_uc(int k) const {
  return -kElementaryCharge * worn_nit_cm2 * 1e6 * worn_occ[k];
}

double junction_screen_len_nm(double v, const DeviceState& dev) {
  if (v <= 0.0) return 0.0;
  double lj_cm = std::sqrt(2.0 * dev.stack.eps_si * kEps0FPerCm * dev.junction_phi_bi_v /
                           (kElementaryCharge * dev.stack.na_cm3));
  double cap_nm = dev.junction_screen_scale * lj_cm * 1e7;
  return cap_nm * (1.0 - std::exp(-v / dev.junction_screen_v0_v));
}

namespace {

// chain of gate-limited conductors left after junction screening
struct ChainContext {
  double vt_th;                  // thermal voltage
  double n_ideal;
  std::vector<double> vp;        // pinch-off variable per active segment
  std::vector<double> spec;      // current prefactor per active segment, A
  int k0 = 0, k1 = -1;           // active segment range [k0, k1]
  double v_src = 0.0, v_drn = 0.0;  // channel potentials at the active ends
  double vg_eff = 0.0;
  std::vector<double> frac;      // unscreened fraction, all segments
};

ChainContext build_context(const DeviceState& dev, const BiasPoint& bias,
                           const std::vector<double>* vt_cache) {
  ChainContext cx;
  const StackParams& sp = dev.stack;
  cx.vt_th = sp.vt_th();
  cx.n_ideal = sp.ideality_n();
  cx.vg_eff = bias.v_g - bias.v_b;
  cx.v_src = std::max(bias.v_s - bias.v_b, -dev.junction_fwd_clamp_v);
  cx.v_drn = std::max(bias.v_d - bias.v_b, -dev.junction_fwd_clamp_v);

  double seg_len = dev.seg_len_nm();
  double ls = junction_screen_len_nm(cx.v_src, dev);
  double ld = junction_screen_len_nm(cx.v_drn, dev);
  if (ls + ld > 0.92 * dev.l_nm) {  // crude punch-through cap
    double scale = 0.92 * dev.l_nm / (ls + ld);
    ls *= scale;
    ld *= scale;
  }
  cx.frac.resize(dev.n_seg);
  cx.k0 = -1;
  for (int k = 0; k < dev.n_seg; ++k) {
    double a = k * seg_len, b = (k + 1) * seg_len;
    double lo = std::max(a, ls), hi = std::min(b, dev.l_nm - ld);
    double f = std::max(0.0, hi - lo) / seg_len;
    cx.frac[k] = f;
    if (f > 1e-9) {
      if (cx.k0 < 0) cx.k0 = k;
      cx.k1 = k;
    }
  }
  if (cx.k0 < 0) throw ConvergenceError("solve_channel: channel fully screened");

  double c_stack_f = sp.c_stack_uc() * 1e-6;  // F/cm^2
  double i0 = 2.0 * cx.n_ideal * dev.mobility_cm2_vs * c_stack_f * cx.vt_th * cx.vt_th;
  for (int k = cx.k0; k <= cx.k1; ++k) {
    double vt_local = vt_cache ? (*vt_cache)[k]
                               : segment_threshold(dev.segments[k], 0.0, sp, dev.q_worn_uc(k));
    cx.vp.push_back((cx.vg_eff - vt_local) / cx.n_ideal);
    double len = cx.frac[k] * seg_len;
    cx.spec.push_back(i0 * dev.w_nm / len);
  }
  return cx;
}

// current through active segment j (0-based within the chain), positive when
// flowing from the source end toward the drain end
double seg_current(const ChainContext& cx, int j, double v_lo_node, double v_hi_node) {
  double u_hi = (cx.vp[j] - v_hi_node) / cx.vt_th;
  double u_lo = (cx.vp[j] - v_lo_node) / cx.vt_th;
  return cx.spec[j] * (f_current(u_hi) - f_current(u_lo));
}

struct ChainResult {
  std::vector<double> v;  // node potentials for the active chain, size m+1
  double spread = 0.0;
  double i_sd = 0.0;
  int iterations = 0;
  bool ok = false;
};

double chain_spread(const ChainContext& cx, const std::vector<double>& v, double* i_mean) {
  int m = static_cast<int>(cx.vp.size());
  double mean = 0.0;
  for (int j = 0; j < m; ++j) mean += seg_current(cx, j, v[j], v[j + 1]);
  mean /= m;
  double dev = 0.0;
  for (int j = 0; j < m; ++j)
    dev = std::max(dev, std::fabs(seg_current(cx, j, v[j], v[j + 1]) - mean));
  if (i_mean) *i_mean = mean;
  return dev / std::max(std::fabs(mean), 1e-18);
}

ChainResult solve_newton(const ChainContext& cx, double tol) {
  int m = static_cast<int>(cx.vp.size());
  ChainResult res;
  res.v.resize(m + 1);
  for (int j = 0; j <= m; ++j)
    res.v[j] = cx.v_src + (cx.v_drn - cx.v_src) * j / m;
  if (m == 1 || cx.v_src == cx.v_drn) {
    res.spread = 0.0;
    res.i_sd = seg_current(cx, 0, res.v[0], res.v[1]);
    res.ok = true;
    return res;
  }
  int n_int = m - 1;
  std::vector<double> r(n_int), dl(n_int), dm(n_int), du(n_int), dv(n_int);
  auto residual_norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 0; i < n_int; ++i) {
      double ri = seg_current(cx, i, v[i], v[i + 1]) -
                  seg_current(cx, i + 1, v[i + 1], v[i + 2]);
      s = std::max(s, std::fabs(ri));
    }
    return s;
  };
  double rnorm = residual_norm(res.v);
  for (int it = 0; it < 120; ++it) {
    double i_mean = 0.0;
    res.spread = chain_spread(cx, res.v, &i_mean);
    res.i_sd = i_mean;
    res.iterations = it;
    if (res.spread <= tol) {
      res.ok = true;
      return res;
    }
    for (int i = 0; i < n_int; ++i) {
      int ja = i, jb = i + 1;  // segments around interior node i+1
      double ua_hi = (cx.vp[ja] - res.v[i + 1]) / cx.vt_th;
      double ua_lo = (cx.vp[ja] - res.v[i]) / cx.vt_th;
      double ub_hi = (cx.vp[jb] - res.v[i + 2]) / cx.vt_th;
      double ub_lo = (cx.vp[jb] - res.v[i + 1]) / cx.vt_th;
      r[i] = cx.spec[ja] * (f_current(ua_hi) - f_current(ua_lo)) -
             cx.spec[jb] * (f_current(ub_hi) - f_current(ub_lo));
      // d r_i / d v_{i+1}
      dm[i] = -cx.spec[ja] / cx.vt_th * f_current_deriv(ua_hi) -
              cx.spec[jb] / cx.vt_th * f_current_deriv(ub_lo);
      dl[i] = (i > 0) ? cx.spec[ja] / cx.vt_th * f_current_deriv(ua_lo) : 0.0;
      du[i] = (i < n_int - 1) ? cx.spec[jb] / cx.vt_th * f_current_deriv(ub_hi) : 0.0;
    }
    // Thomas solve (J dv = -r), with a tiny diagonal guard
    for (int i = 0; i < n_int; ++i) {
      if (std::fabs(dm[i]) < 1e-300) dm[i] = -1e-300;
      r[i] = -r[i];
    }
    for (int i = 1; i < n_int; ++i) {
      double w = dl[i] / dm[i - 1];
      dm[i] -= w * du[i - 1];
      if (std::fabs(dm[i]) < 1e-300) dm[i] = (dm[i] < 0 ? -1e-300 : 1e-300);
      r[i] -= w * r[i - 1];
    }
    dv[n_int - 1] = r[n_int - 1] / dm[n_int - 1];
    for (int i = n_int - 2; i >= 0; --i) dv[i] = (r[i] - du[i] * dv[i + 1]) / dm[i];
    for (int i = 0; i < n_int; ++i) dv[i] = std::clamp(dv[i], -0.5, 0.5);
    // damped update
    double step = 1.0;
    std::vector<double> trial = res.v;
    for (int half = 0; half < 40; ++half) {
      for (int i = 0; i < n_int; ++i) trial[i + 1] = res.v[i + 1] + step * dv[i];
      double rn = residual_norm(trial);
      if (rn < rnorm || rn == 0.0) {
        rnorm = rn;
        break;
      }
      step *= 0.5;
      if (half == 39) return res;  // stagnated, caller falls back
    }
    res.v = trial;
  }
  return res;
}

ChainResult solve_shooting(const ChainContext& cx, double tol) {
  int m = static_cast<int>(cx.vp.size());
  ChainResult res;
  res.v.assign(m + 1, cx.v_src);
  if (cx.v_src == cx.v_drn) {
    res.ok = true;
    return res;
  }
  const double kHi = 1e12;
  auto shoot = [&](double i_sd, std::vector<double>* nodes) -> double {
    double v = cx.v_src;
    if (nodes) (*nodes)[0] = v;
    for (int j = 0; j < m; ++j) {
      double y = f_current((cx.vp[j] - v) / cx.vt_th) + i_sd / cx.spec[j];
      if (y <= 0.0) {
        if (nodes)
          for (int q = j + 1; q <= m; ++q) (*nodes)[q] = kHi;
        return kHi;
      }
      v = cx.vp[j] - cx.vt_th * f_current_inv(y);
      if (nodes) (*nodes)[j + 1] = v;
    }
    return v;
  };
  // v_end(i_sd) is strictly decreasing; expand a bracket around the root
  double v_end0 = shoot(0.0, nullptr);
  if (std::fabs(v_end0 - cx.v_drn) < 1e-15) {
    res.i_sd = 0.0;
    res.ok = true;
    shoot(0.0, &res.v);
    res.spread = 0.0;
    return res;
  }
  double sign = (v_end0 > cx.v_drn) ? 1.0 : -1.0;
  double hi = 1e-18;
  for (int it = 0; it < 400; ++it) {
    double ve = shoot(sign * hi, nullptr);
    bool crossed = (sign > 0) ? (ve <= cx.v_drn) : (ve >= cx.v_drn);
    if (crossed) break;
    hi *= 4.0;
    if (it == 399) throw ConvergenceError("solve_channel: shooting bracket failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 300; ++it) {
    double mid = (lo == 0.0) ? hi / 4.0 : std::sqrt(lo * hi);  // geometric once possible
    if (lo > 0.0 && hi / lo < 1.0 + 1e-15) break;
    double ve = shoot(sign * mid, nullptr);
    bool crossed = (sign > 0) ? (ve <= cx.v_drn) : (ve >= cx.v_drn);
    if (crossed)
      hi = mid;
    else
      lo = mid;
    res.iterations = it;
  }
  res.i_sd = sign * 0.5 * (lo + hi);
  shoot(res.i_sd, &res.v);
  res.v[m] = cx.v_drn;  // pin the far terminal; residual shows up as spread
  res.spread = chain_spread(cx, res.v, &res.i_sd);
  res.ok = res.spread <= tol * 10.0;
  return res;
}

}  // namespace

std::vector<double> local_thresholds(const DeviceState& dev) {
  std::vector<double> vt(dev.n_seg);
  for (int k = 0; k < dev.n_seg; ++k)
    vt[k] = segment_threshold(dev.segments[k], 0.0, dev.stack, dev.q_worn_uc(k));
  return vt;
}

ChannelSolution solve_channel(const DeviceState& dev, const BiasPoint& bias,
                              const ChannelSolveOptions& opt) {
  ChainContext cx = build_context(dev, bias, opt.vt_local);
  ChainResult cr;
  if (!opt.force_shooting) {
    cr = solve_newton(cx, opt.spread_tol);
    if (!cr.ok) {
      ChainResult sh = solve_shooting(cx, opt.spread_tol);
      sh.iterations += cr.iterations;
      cr = sh;
      cr.ok = true;  // shooting result is exact up to its own bisection tol
    }
  } else {
    cr = solve_shooting(cx, opt.spread_tol);
  }

  ChannelSolution sol;
  sol.iterations = cr.iterations;
  sol.spread = cr.spread;
  sol.used_fallback = opt.force_shooting || !cr.ok;
  // expand the reduced chain back onto the full node list: screened regions
  // sit at their terminal's channel potential
  sol.node_v.assign(dev.n_seg + 1, 0.0);
  for (int j = 0; j <= dev.n_seg; ++j) {
    if (j <= cx.k0)
      sol.node_v[j] = cx.v_src;
    else if (j > cx.k1)
      sol.node_v[j] = cx.v_drn;
    else
      sol.node_v[j] = cr.v[j - cx.k0];
  }
  sol.node_v[0] = cx.v_src;
  sol.node_v[dev.n_seg] = cx.v_drn;
  sol.i_d = -cr.i_sd;
  sol.i_s = cr.i_sd;

  if (opt.want_psi_profile) {
    sol.psi_profile.resize(dev.n_seg);
    for (int k = 0; k < dev.n_seg; ++k) {
      double v_ch = 0.5 * (sol.node_v[k] + sol.node_v[k + 1]);
      sol.psi_profile[k] =
          solve_vertical_stack(cx.vg_eff, v_ch, dev.segments[k], dev.stack, dev.q_worn_uc(k))
              .psi_s;
    }
  }
  return sol;
}

TransferCurve transfer_curve(const DeviceState& dev, ReadTerminal read_terminal,
                             double v_read, double vg_lo, double vg_hi, int n_pts) {
  if (n_pts < 2) throw InputError("transfer_curve: need at least two points");
  if (!(vg_hi > vg_lo)) throw InputError("transfer_curve: empty sweep range");
  TransferCurve curve;
  curve.read_terminal = read_terminal;
  curve.v_read = v_read;
  curve.points.reserve(n_pts);
  std::vector<double> vt_cache = local_thresholds(dev);
  for (int i = 0; i < n_pts; ++i) {
    double vg = vg_lo + (vg_hi - vg_lo) * i / (n_pts - 1);
    BiasPoint bias;
    bias.v_g = vg;
    if (read_terminal == ReadTerminal::Drain)
      bias.v_d = v_read;
    else
      bias.v_s = v_read;
    ChannelSolution sol;
    ChannelSolveOptions opt;
    opt.vt_local = &vt_cache;
    try {
      sol = solve_channel(dev, bias, opt);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string("transfer_curve: solve failed at V_G = ") +
                                 std::to_string(vg) + ": " + e.what(),
                             e.residual);
    }
    double i_term = (read_terminal == ReadTerminal::Drain) ? sol.i_d : sol.i_s;
    curve.points.push_back({vg, std::fabs(i_term) + dev.current_floor_a});
  }
  return curve;
}

double extract_vt(const TransferCurve& curve, double w_nm, double l_nm) {
  if (curve.points.empty()) throw InputError("extract_vt: empty curve");
  double i0 = 1e-6 * w_nm / l_nm;
  const auto& pts = curve.points;
  if (pts.front().i >= i0) return pts.front().vg;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].i >= i0) {
      double la = std::log(pts[i - 1].i), lb = std::log(pts[i].i);
      double t = (std::log(i0) - la) / (lb - la);
      return pts[i - 1].vg + t * (pts[i].vg - pts[i - 1].vg);
    }
  }
  throw NoCrossingError("extract_vt: curve never reaches the constant-current level");
}

std::string curve_to_csv(const TransferCurve& curve) {
  std::string out = "vg,i,terminal,vread\n";
  char buf[128];
  const char* term = curve.read_terminal == ReadTerminal::Drain ? "drain" : "source";
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%s,%.9g\n", p.vg, p.i, term, curve.v_read);
    out += buf;
  }
  return out;
}

}  // namespace mirrorbit
