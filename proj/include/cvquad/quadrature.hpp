#pragma once

#include <functional>

namespace cvquad {

// integer power by repeated multiplication; std::pow(negative, double) is NaN,
// and moments raise possibly-negative values to integer q all over the place
inline double ipow(double x, int q) {
  double r = 1.0;
  for (int i = 0; i < q; ++i) r *= x;
  return r;
}

using BoxFn = std::function<double(const double*)>;

// Composite Simpson on an axis-aligned box, doubling the per-axis interval
// count until two successive estimates agree within tol (absolute). Throws
// std::runtime_error carrying the last two estimates when the refinement
// budget runs out before that happens.
double integrate_box(const BoxFn& fn, const double* lo, const double* hi, int d, double tol);

// single composite-Simpson pass at a fixed resolution (intervals per axis,
// rounded up to even); used where the caller controls accuracy itself
double simpson_fixed(const BoxFn& fn, const double* lo, const double* hi, int d,
                     std::size_t intervals_per_axis);

}  // namespace cvquad
