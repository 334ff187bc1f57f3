#include "cvquad/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cvquad {

namespace {

// one composite-Simpson pass with `iv` (even) intervals per axis
double simpson_pass(const BoxFn& fn, const double* lo, const double* hi, int d,
                    std::size_t iv) {
  const std::size_t pts = iv + 1;
  std::vector<double> w1(pts), x1;
  for (std::size_t i = 0; i < pts; ++i)
    w1[i] = (i == 0 || i == iv) ? 1.0 : ((i % 2 == 1) ? 4.0 : 2.0);

  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= pts;

  double scale = 1.0;
  for (int a = 0; a < d; ++a) scale *= (hi[a] - lo[a]) / static_cast<double>(iv) / 3.0;

  std::vector<double> x(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t i = rem % pts;
      rem /= pts;
      w *= w1[i];
      x[static_cast<std::size_t>(a)] =
          lo[a] + (hi[a] - lo[a]) * static_cast<double>(i) / static_cast<double>(iv);
    }
    sum += w * fn(x.data());
  }
  return sum * scale;
}

std::size_t max_intervals_for(int d) {
  switch (d) {
    case 1: return 1u << 22;
    case 2: return 1u << 11;
    default: return 1u << 7;  // d = 3
  }
}

}  // namespace

double simpson_fixed(const BoxFn& fn, const double* lo, const double* hi, int d,
                     std::size_t intervals_per_axis) {
  if (d < 1 || d > 3) throw std::invalid_argument("simpson_fixed: d must be 1..3");
  std::size_t iv = intervals_per_axis < 2 ? 2 : intervals_per_axis;
  if (iv % 2) ++iv;
  return simpson_pass(fn, lo, hi, d, iv);
}

double integrate_box(const BoxFn& fn, const double* lo, const double* hi, int d, double tol) {
  if (d < 1 || d > 3) throw std::invalid_argument("integrate_box: d must be 1..3");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_box: tol must be > 0");
  const std::size_t cap = max_intervals_for(d);
  double prev = simpson_pass(fn, lo, hi, d, 4);
  double cur = prev;
  for (std::size_t iv = 8; iv <= cap; iv *= 2) {
    cur = simpson_pass(fn, lo, hi, d, iv);
    if (std::abs(cur - prev) <= tol) return cur;
    if (iv < cap) prev = cur;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "integrate_box: no convergence within refinement budget; last two estimates "
      << prev << " and " << cur << " (tol " << tol << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace cvquad
