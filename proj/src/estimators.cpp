#include "cvquad/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cvquad/quadrature.hpp"

namespace cvquad {

const char* method_name(Method m) {
  switch (m) {
    case Method::PlainMC: return "plain_mc";
    case Method::TruncatedMC: return "truncated_mc";
    case Method::CVMoment: return "cv_moment";
    case Method::KnnQuadratureDirect: return "knn_quadrature";
    case Method::KnnQuadratureWeights: return "knn_quadrature_weights";
  }
  return "?";
}

namespace {

void require_observed(const SampleSet& s, const char* who) {
  if (s.n == 0 || s.ys.size() != s.n) {
    std::ostringstream msg;
    msg << who << ": sample set has no observations";
    throw std::invalid_argument(msg.str());
  }
}

void require_q(int q, const char* who) {
  if (q < 1) {
    std::ostringstream msg;
    msg << who << ": moment order q must be >= 1";
    throw std::invalid_argument(msg.str());
  }
}

// mean over the correction half of (y^q - fhat(x)^q), the term that removes
// the regression bias from the plug-in integral
template <typename Fhat>
double correction_mean(const SampleSet& s2, int q, Fhat&& fhat) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s2.n; ++i)
    sum += ipow(s2.ys[i], q) - ipow(fhat(s2.point(i)), q);
  return sum / static_cast<double>(s2.n);
}

// midpoint tensor quadrature of predict(.)^q at res points per axis
double midpoint_integral_pow(const Regressor& reg, int q, std::size_t res) {
  const int d = reg.dim();
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= res;
  double sum = 0.0;
  std::vector<double> z(static_cast<std::size_t>(d), 0.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      z[static_cast<std::size_t>(a)] =
          (static_cast<double>(rem % res) + 0.5) / static_cast<double>(res);
      rem /= res;
    }
    sum += ipow(reg.predict(z.data()), q);
  }
  return sum / static_cast<double>(total);
}

double grid_integral_pow(const Regressor& reg, int q) {
  const std::size_t total = reg.cell_means().size();
  double sum = 0.0;
  for (double m : reg.cell_means()) sum += ipow(m, q);
  return sum / static_cast<double>(total);
}

}  // namespace

Estimate plain_mc_moment(const SampleSet& s, int q) {
  require_observed(s, "plain_mc_moment");
  require_q(q, "plain_mc_moment");
  double sum = 0.0;
  for (double y : s.ys) sum += ipow(y, q);
  Estimate e;
  e.value = sum / static_cast<double>(s.n);
  e.method = Method::PlainMC;
  e.n = s.n;
  e.q = q;
  return e;
}

double default_truncation(std::size_t n, double s, double p, int d, double c) {
  const double expo = 1.0 / p - s / static_cast<double>(d);
  if (!(expo > 0.0)) {
    std::ostringstream msg;
    msg << "default_truncation: requires s/d < 1/p (got s/d = "
        << s / static_cast<double>(d) << ", 1/p = " << 1.0 / p
        << "); a growing truncation level only exists below that line";
    throw std::invalid_argument(msg.str());
  }
  if (!(c > 0.0)) throw std::invalid_argument("default_truncation: requires c > 0");
  return c * std::pow(static_cast<double>(n), expo);
}

Estimate truncated_mc_moment(const SampleSet& s, int q, double m_trunc) {
  require_observed(s, "truncated_mc_moment");
  require_q(q, "truncated_mc_moment");
  if (!(m_trunc > 0.0))
    throw std::invalid_argument("truncated_mc_moment: truncation level must be > 0");
  double sum = 0.0;
  for (double y : s.ys) sum += ipow(std::clamp(y, -m_trunc, m_trunc), q);
  Estimate e;
  e.value = sum / static_cast<double>(s.n);
  e.method = Method::TruncatedMC;
  e.n = s.n;
  e.q = q;
  e.truncation = m_trunc;
  return e;
}

std::size_t default_quad_resolution(int d, std::size_t k) {
  const double per_axis = std::ceil(std::pow(1024.0, 1.0 / static_cast<double>(d)));
  return std::max(static_cast<std::size_t>(per_axis), 4 * std::max<std::size_t>(k, 1));
}

Estimate cv_moment(const SampleSet& s, int q, const RegressorSpec& reg,
                   std::size_t quad_resolution, RngStream* /*rng*/) {
  require_observed(s, "cv_moment");
  require_q(q, "cv_moment");
  auto [s1, s2] = split_halves(s);
  Estimate e;
  e.method = Method::CVMoment;
  e.n = s.n;
  e.q = q;
  if (reg.kind == RegressorKind::KNN) {
    const Regressor fit = fit_knn(s1, reg.k);
    const std::size_t res =
        quad_resolution > 0 ? quad_resolution : default_quad_resolution(s.d, reg.k);
    e.k = reg.k;
    e.quad_resolution = res;
    e.integral_part = midpoint_integral_pow(fit, q, res);
    e.correction_part = correction_mean(s2, q, [&](const double* z) { return fit.predict(z); });
  } else {
    const Regressor fit = fit_grid(s1, reg.cells_per_axis, reg.fill);
    e.cells = reg.cells_per_axis;
    e.integral_part = grid_integral_pow(fit, q);
    e.correction_part = correction_mean(s2, q, [&](const double* z) { return fit.predict(z); });
  }
  e.value = e.integral_part + e.correction_part;
  return e;
}

Estimate cv_moment_with_oracle(const SampleSet& s2, int q,
                               const std::function<double(const double*)>& fhat,
                               double integral_fhat_q) {
  require_observed(s2, "cv_moment_with_oracle");
  require_q(q, "cv_moment_with_oracle");
  Estimate e;
  e.method = Method::CVMoment;
  e.n = s2.n;
  e.q = q;
  e.integral_part = integral_fhat_q;
  e.correction_part = correction_mean(s2, q, [&](const double* z) { return fhat(z); });
  e.value = e.integral_part + e.correction_part;
  return e;
}

namespace {

// exact integral of a d=1 KNN predictor via its cell volumes: by the duality
// x_j in T_{k,z} <=> z in D_j, integrating the piecewise-constant prediction
// equals sum_i V(D_i) y_i / k
double weighted_integral(const Regressor& fit, const CellVolumes& vols) {
  double sum = 0.0;
  for (std::size_t i = 0; i < fit.train_size(); ++i)
    sum += vols.volumes[i] * fit.train_value(i);
  return sum / static_cast<double>(fit.k());
}

}  // namespace

Estimate integral_knn_quadrature(const SampleSet& s, std::size_t k,
                                 std::size_t quad_resolution) {
  require_observed(s, "integral_knn_quadrature");
  auto [s1, s2] = split_halves(s);
  const Regressor fit = fit_knn(s1, k);
  Estimate e;
  e.method = Method::KnnQuadratureDirect;
  e.n = s.n;
  e.q = 1;
  e.k = k;
  if (s.d == 1) {
    e.integral_part = weighted_integral(fit, knn_cell_volumes(fit));
  } else {
    const std::size_t res =
        quad_resolution > 0 ? quad_resolution : default_quad_resolution(s.d, k);
    e.quad_resolution = res;
    e.integral_part = midpoint_integral_pow(fit, 1, res);
  }
  e.correction_part = correction_mean(s2, 1, [&](const double* z) { return fit.predict(z); });
  e.value = e.integral_part + e.correction_part;
  return e;
}

Estimate integral_weights_form(const SampleSet& s, std::size_t k, std::size_t probe_n,
                               RngStream* rng, int threads) {
  require_observed(s, "integral_weights_form");
  auto [s1, s2] = split_halves(s);
  const Regressor fit = fit_knn(s1, k);
  const CellVolumes vols = knn_cell_volumes(fit, probe_n, rng, threads);
  Estimate e;
  e.method = Method::KnnQuadratureWeights;
  e.n = s.n;
  e.q = 1;
  e.k = k;
  e.integral_part = weighted_integral(fit, vols);
  e.correction_part = correction_mean(s2, 1, [&](const double* z) { return fit.predict(z); });
  e.value = e.integral_part + e.correction_part;
  return e;
}

}  // namespace cvquad
