#pragma once

#include <cmath>
#include <functional>

#include "mirrorbit/errors.hpp"

namespace mirrorbit {

struct RootOptions {
  double x_tol = 1e-14;    // absolute on the bracket width, scaled by max(1,|x|)
  int max_iter = 200;
  bool bisection_only = false;  // disable the secant acceleration
};

/// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign.
/// Bisection with secant acceleration; unconditionally convergent.
template <class F>
double find_root(F&& f, double lo, double hi, double flo, double fhi,
                 const RootOptions& opt = {}) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw ConvergenceError("find_root: endpoints do not bracket a sign change", flo);
  for (int it = 0; it < opt.max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    double x = mid;
    // secant through the bracket endpoints on odd iterations; the
    // interleaved bisection guarantees the bracket keeps halving
    if (!opt.bisection_only && (it & 1)) {
      double xs = lo - flo * (hi - lo) / (fhi - flo);
      double guard = 0.01 * (hi - lo);
      if (xs > lo + guard && xs < hi - guard) x = xs;
    }
    double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo <= opt.x_tol * std::max(1.0, std::fabs(mid))) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

template <class F>
double find_root(F&& f, double lo, double hi, const RootOptions& opt = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  return find_root(std::forward<F>(f), lo, hi, flo, fhi, opt);
}

}  // namespace mirrorbit
