#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "spdc/errors.hpp"

namespace spdc {

template <typename Scalar>
struct RootResult {
  Scalar x;
  Scalar fx;
  int iterations;
};

/// Bracketed 1-D root finder: bisection safeguarding secant (regula falsi)
/// steps. A secant step is taken only while the bracket keeps shrinking by at
/// least half per step; otherwise the next step bisects. Terminates when the
/// bracket is narrower than `x_tol`.
///
/// Throws NoSolutionError when f(lo) and f(hi) have the same strict sign.
template <typename Scalar, typename F>
RootResult<Scalar> find_root_bracketed(F&& f, Scalar lo, Scalar hi, Scalar x_tol,
                                       int max_iterations = 400) {
  Scalar f_lo = f(lo);
  Scalar f_hi = f(hi);
  if (f_lo == Scalar(0)) return {lo, f_lo, 0};
  if (f_hi == Scalar(0)) return {hi, f_hi, 0};
  if ((f_lo > 0) == (f_hi > 0)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << f_lo << ", f(hi)=" << f_hi;
    throw NoSolutionError(msg.str());
  }

  bool bisect_next = false;
  Scalar width = hi - lo;
  int it = 0;
  for (; it < max_iterations && (hi - lo) > x_tol; ++it) {
    Scalar x;
    if (bisect_next) {
      x = lo + (hi - lo) / 2;
    } else {
      x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
      // Secant landed on (or outside) an end point; fall back.
      if (!(x > lo && x < hi)) x = lo + (hi - lo) / 2;
    }
    const Scalar fx = f(x);
    if (fx == Scalar(0)) return {x, fx, it + 1};
    if ((fx > 0) == (f_lo > 0)) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    const Scalar new_width = hi - lo;
    bisect_next = new_width > width / 2;
    width = new_width;
  }
  if (std::abs(f_lo) <= std::abs(f_hi)) return {lo, f_lo, it};
  return {hi, f_hi, it};
}

}  // namespace spdc
