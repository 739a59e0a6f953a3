#include "mirrorbit/preisach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mirrorbit {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double ex = std::exp(x);
  return ex / (1.0 + ex);
}

}  // namespace

double derive_delta(double pr, double ps, double ec) {
  if (!(pr > 0.0) || !(pr < ps)) throw ParameterError("derive_delta: requires 0 < pr < ps");
  if (!(ec > 0.0)) throw ParameterError("derive_delta: requires ec > 0");
  return ec / std::log((ps + pr) / (ps - pr));
}

FerroParams FerroParams::make(double pr, double ps, double ec) {
  FerroParams fp;
  fp.pr = pr;
  fp.ps = ps;
  fp.ec = ec;
  fp.delta = derive_delta(pr, ps, ec);
  return fp;
}

void FerroParams::validate() const {
  if (!(pr > 0.0 && pr < ps)) throw ParameterError("FerroParams: requires 0 < pr < ps");
  if (!(ec > 0.0)) throw ParameterError("FerroParams: requires ec > 0");
  if (!(delta > 0.0)) throw ParameterError("FerroParams: requires delta > 0 (use make())");
}

double saturated_branch(double e, Direction dir, const FerroParams& fp) {
  double shift = (dir == Direction::Ascending) ? -fp.ec : +fp.ec;
  return fp.ps * std::tanh((e + shift) / (2.0 * fp.delta));
}

HysteresisState HysteresisState::saturated(int sign, const FerroParams& fp) {
  HysteresisState s;
  s.tps_.clear();
  s.e_now_ = (sign >= 0 ? 1.0 : -1.0) * kClipEcMultiple * fp.ec;
  if (sign >= 0) {
    s.base_ = Base::FromPosSat;
    s.dir_ = -1;
    s.p_now_ = saturated_branch(s.e_now_, Direction::Descending, fp);
  } else {
    s.base_ = Base::FromNegSat;
    s.dir_ = +1;
    s.p_now_ = saturated_branch(s.e_now_, Direction::Ascending, fp);
  }
  return s;
}

double HysteresisState::leg_eval(std::size_t depth, double e, int dir,
                                 const FerroParams& fp) const {
  Direction d = dir > 0 ? Direction::Ascending : Direction::Descending;
  if (depth == 0) {
    switch (base_) {
      case Base::FromPosSat:
        return saturated_branch(e, Direction::Descending, fp);
      case Base::FromNegSat:
        return saturated_branch(e, Direction::Ascending, fp);
      case Base::Virgin: {
        if (dir == 0) return 0.0;
        // leg from the origin toward +-ps
        double ge = saturated_branch(e, d, fp);
        double gr = saturated_branch(0.0, d, fp);
        double sp = dir > 0 ? fp.ps : -fp.ps;
        double den = sp - gr;
        if (std::fabs(den) < 1e-300) return 0.0;
        return sp * (ge - gr) / den;
      }
    }
  }
  const TurningPoint& root = tps_[depth - 1];
  double ge = saturated_branch(e, d, fp);
  double gr = saturated_branch(root.e, d, fp);
  double anchor_g, anchor_p;
  if (depth >= 2) {
    const TurningPoint& a = tps_[depth - 2];
    anchor_g = saturated_branch(a.e, d, fp);
    anchor_p = a.p;
  } else if (base_ == Base::Virgin) {
    anchor_g = saturated_branch(0.0, d, fp);
    anchor_p = 0.0;
  } else {
    anchor_g = dir > 0 ? fp.ps : -fp.ps;
    anchor_p = anchor_g;
  }
  double den = anchor_g - gr;
  if (std::fabs(den) < 1e-300) return root.p;
  return root.p + (anchor_p - root.p) * (ge - gr) / den;
}

double HysteresisState::branch_eval(double e, const FerroParams& fp) const {
  if (!std::isfinite(e)) throw InputError("branch_eval: non-finite field");
  int dir = dir_;
  if (dir == 0) dir = (e >= e_now_) ? +1 : -1;  // virgin at rest
  // fields beyond the enclosing turning points follow the outer legs, the
  // same piecewise curve a committed excursion would trace (virtual wipe-out)
  std::size_t depth = tps_.size();
  while (true) {
    if (depth >= 2) {
      const TurningPoint& anchor = tps_[depth - 2];
      if ((dir > 0 && e >= anchor.e) || (dir < 0 && e <= anchor.e)) {
        depth -= 2;
        continue;
      }
    } else if (depth == 1 && base_ == Base::Virgin) {
      if ((dir > 0 && e >= 0.0) || (dir < 0 && e <= 0.0)) {
        depth -= 1;
        continue;
      }
    }
    break;
  }
  return leg_eval(depth, e, dir, fp);
}

void HysteresisState::apply_field(double e, const FerroParams& fp) {
  if (!std::isfinite(e)) throw InputError("apply_field: non-finite field");
  if (e == e_now_) return;
  int move = (e > e_now_) ? +1 : -1;
  if (dir_ == 0) dir_ = move;
  if (move != dir_) {
    tps_.push_back({e_now_, p_now_});
    dir_ = move;
  }
  // wipe-out: crossing a stored turning point closes and erases its sub-loop;
  // ties count as crossed
  while (true) {
    if (tps_.size() >= 2) {
      const TurningPoint& anchor = tps_[tps_.size() - 2];
      if ((dir_ > 0 && e >= anchor.e) || (dir_ < 0 && e <= anchor.e)) {
        tps_.pop_back();
        tps_.pop_back();
        continue;
      }
    } else if (tps_.size() == 1 && base_ == Base::Virgin) {
      // the virgin origin acts as the innermost anchor
      if ((dir_ > 0 && e >= 0.0) || (dir_ < 0 && e <= 0.0)) {
        tps_.pop_back();
        continue;
      }
    }
    break;
  }
  double p = leg_eval(tps_.size(), e, dir_, fp);
  const double clip_e = kClipEcMultiple * fp.ec;
  if (dir_ > 0 && (p >= fp.ps * (1.0 - kSatEps) || e >= clip_e)) {
    base_ = Base::FromPosSat;
    tps_.clear();
    dir_ = -1;
    e_now_ = e;
    p_now_ = saturated_branch(e, Direction::Descending, fp);
    return;
  }
  if (dir_ < 0 && (p <= -fp.ps * (1.0 - kSatEps) || e <= -clip_e)) {
    base_ = Base::FromNegSat;
    tps_.clear();
    dir_ = +1;
    e_now_ = e;
    p_now_ = saturated_branch(e, Direction::Ascending, fp);
    return;
  }
  e_now_ = e;
  p_now_ = p;
}

void HysteresisState::check_invariants(const FerroParams& fp) const {
  if (std::fabs(p_now_) > fp.ps)
    throw std::logic_error("HysteresisState: |P| exceeds ps");
  int k = static_cast<int>(tps_.size());
  if (k == 0) return;
  // walking from the top of the stack: the last point was left moving in
  // dir_, the one below in -dir_, alternating; each point must lie strictly
  // inside the enclosing pair
  int d = dir_;
  double inner_e = e_now_;
  for (int i = k - 1; i >= 0; --i) {
    // with leg direction d, the point at i is the reversal we departed from:
    // a minimum if d > 0, a maximum if d < 0
    if (d > 0 && !(tps_[i].e <= inner_e))
      throw std::logic_error("HysteresisState: ascending leg left of its root");
    if (d < 0 && !(tps_[i].e >= inner_e))
      throw std::logic_error("HysteresisState: descending leg right of its root");
    if (i >= 1) {
      // enclosing point lies beyond the current position in direction d
      if (d > 0 && !(tps_[i - 1].e > e_now_))
        throw std::logic_error("HysteresisState: stale maximum not wiped");
      if (d < 0 && !(tps_[i - 1].e < e_now_))
        throw std::logic_error("HysteresisState: stale minimum not wiped");
      if (i >= 2 && d > 0 && !(tps_[i].e > tps_[i - 2].e))
        throw std::logic_error("HysteresisState: minima not nested");
      if (i >= 2 && d < 0 && !(tps_[i].e < tps_[i - 2].e))
        throw std::logic_error("HysteresisState: maxima not nested");
    }
    inner_e = tps_[i].e;
    d = -d;
  }
}

HysteresisState HysteresisState::restore(Base base, int dir, std::vector<TurningPoint> tps,
                                         double e_now, double p_now) {
  HysteresisState s;
  s.base_ = base;
  s.dir_ = dir;
  s.tps_ = std::move(tps);
  s.e_now_ = e_now;
  s.p_now_ = p_now;
  return s;
}

std::pair<HysteresisState, double> hysteron_update(const HysteresisState& state,
                                                   double e_new,
                                                   const FerroParams& fp) {
  HysteresisState s = state;
  s.apply_field(e_new, fp);
  return {s, s.polarization()};
}

// ---------------------------------------------------------------------------
// Preisach plane oracle
// ---------------------------------------------------------------------------

namespace {

// Cumulative relay measure: mass of {alpha <= a, beta >= b}. Derived in
// closed form from the saturated branches so that (a) the alpha marginal
// reproduces the ascending branch, (b) the beta marginal reproduces the
// descending branch, and (c) first reversal curves match the rescaled-branch
// minor loop rule.
struct Measure {
  double ps, ec, delta;
  double fa(double x) const { return logistic((x - ec) / delta); }
  double fd(double x) const { return logistic((x + ec) / delta); }
  double mass(double a, double b) const {
    if (b >= a) return 0.0;
    double fda = fd(a);
    double g = (fda > 0.0) ? fa(a) / fda : 0.0;
    double m = ps * g * (fda - fd(b));
    return std::max(0.0, m);
  }
};

}  // namespace

PreisachPlaneOracle::PreisachPlaneOracle(const FerroParams& fp, int grid_n, double e_max)
    : n_(grid_n), e_max_(e_max > 0.0 ? e_max : HysteresisState::kClipEcMultiple * fp.ec) {
  if (n_ < 2) throw ParameterError("PreisachPlaneOracle: grid_n too small");
  fp.validate();
  Measure mu{fp.ps, fp.ec, fp.delta};
  const double inf = std::numeric_limits<double>::infinity();

  // Cell edges sit at equal-mass quantiles of the alpha / beta marginals, so
  // each row (column) carries ~ps/n of switchable weight. A uniform grid
  // would dump the whole coercive knee of a square-ish loop into a couple of
  // cells and quantize the major loop far beyond the advertised tolerance.
  auto logit = [](double q) { return std::log(q / (1.0 - q)); };
  // marginal CDF is logistic((x - knee)/delta) on the clipped range;
  // edges at equal-mass quantiles, switching thresholds at cell mass medians
  auto quantile = [&](double knee, double frac) {
    double q_lo = logistic((-e_max_ - knee) / fp.delta);
    double q_hi = logistic((e_max_ - knee) / fp.delta);
    return knee + fp.delta * logit(q_lo + (q_hi - q_lo) * frac);
  };
  std::vector<double> ea(n_ + 1), eb(n_ + 1), ca(n_), cb(n_);
  for (int i = 0; i <= n_; ++i) {
    ea[i] = quantile(+fp.ec, double(i) / n_);
    eb[i] = quantile(-fp.ec, double(i) / n_);
  }
  ea.front() = eb.front() = -e_max_;
  ea.back() = eb.back() = e_max_;
  for (int i = 0; i < n_; ++i) {
    ca[i] = quantile(+fp.ec, (i + 0.5) / n_);
    cb[i] = quantile(-fp.ec, (i + 0.5) / n_);
  }

  rows_.resize(n_);
  total_weight_ = 0.0;
  for (int i = 0; i < n_; ++i) {
    Row& r = rows_[i];
    r.alpha = ca[i];
    double a_lo = (i == 0) ? -inf : ea[i];
    double a_hi = (i == n_ - 1) ? inf : ea[i + 1];
    r.total = 0.0;
    for (int j = 0; j < n_; ++j) {
      double b_lo = (j == 0) ? -inf : eb[j];
      if (b_lo >= a_hi) break;  // cell entirely above the half-plane
      double b_hi = (j == n_ - 1) ? inf : eb[j + 1];
      double w = mu.mass(a_hi, b_lo) - mu.mass(a_lo, b_lo) - mu.mass(a_hi, b_hi) +
                 mu.mass(a_lo, b_hi);
      if (w <= 0.0) continue;
      // a relay's down-switching field cannot exceed its up-switching field
      double bc = std::min(cb[j], r.alpha);
      r.beta.push_back(bc);
      r.prefix.push_back(r.total);
      r.total += w;
    }
    total_weight_ += r.total;
  }
  reset();
}

void PreisachPlaneOracle::reset() {
  front_.assign(n_, -std::numeric_limits<double>::infinity());
}

double PreisachPlaneOracle::row_up_weight(const Row& r, double m) const {
  // weight of relays in this row with beta < m
  std::size_t idx =
      std::lower_bound(r.beta.begin(), r.beta.end(), m) - r.beta.begin();
  if (idx == 0) return 0.0;
  if (idx == r.beta.size()) return r.total;
  return r.prefix[idx];
}

double PreisachPlaneOracle::apply(double e) {
  for (int i = 0; i < n_; ++i) {
    if (rows_[i].alpha <= e)
      front_[i] = e;  // whole row switched up, then clipped by beta >= e
    else
      front_[i] = std::min(front_[i], e);
  }
  return polarization();
}

double PreisachPlaneOracle::polarization() const {
  double p = 0.0;
  for (int i = 0; i < n_; ++i) {
    double up = row_up_weight(rows_[i], front_[i]);
    p += 2.0 * up - rows_[i].total;
  }
  return p;
}

std::vector<double> preisach_plane_oracle(const std::vector<double>& field_sequence,
                                          const FerroParams& fp, int grid_n) {
  if (grid_n < 50) throw ParameterError("preisach_plane_oracle: grid_n must be >= 50");
  std::vector<double> out;
  if (field_sequence.empty()) return out;
  PreisachPlaneOracle oracle(fp, grid_n);
  out.reserve(field_sequence.size());
  for (double e : field_sequence) out.push_back(oracle.apply(e));
  return out;
}

}  // namespace mirrorbit
