#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include "cvquad/regress.hpp"

namespace cvquad {

enum class Method { PlainMC, TruncatedMC, CVMoment, KnnQuadratureDirect, KnnQuadratureWeights };
const char* method_name(Method m);

struct Estimate {
  double value = 0.0;
  Method method = Method::PlainMC;
  std::size_t n = 0;
  int q = 1;
  double truncation = std::numeric_limits<double>::quiet_NaN();  // M
  std::size_t k = 0;
  std::size_t cells = 0;
  std::size_t quad_resolution = 0;
  // split of the two-term estimators: value = integral_part + correction_part
  double integral_part = std::numeric_limits<double>::quiet_NaN();
  double correction_part = std::numeric_limits<double>::quiet_NaN();
};

// (1/n) sum y_i^q
Estimate plain_mc_moment(const SampleSet& s, int q);

// M = c n^{1/p - s/d}; the exponent must be positive or there is nothing to
// truncate against (error names the violated inequality)
double default_truncation(std::size_t n, double s, double p, int d, double c = 1.0);

// (1/n) sum clamp(y_i, -M, M)^q; |result| <= M^q by construction
Estimate truncated_mc_moment(const SampleSet& s, int q, double m_trunc);

struct RegressorSpec {
  RegressorKind kind = RegressorKind::Grid;
  std::size_t k = 1;                // KNN
  std::size_t cells_per_axis = 16;  // Grid
  GridFill fill = GridFill::Zero;
};

// per-axis tensor-quadrature resolution: max(ceil(1024^{1/d}), 4k)
std::size_t default_quad_resolution(int d, std::size_t k);

// int fhat^q + mean over the correction half of (y^q - fhat(x)^q); the fit
// uses the first half only. Grid integrates exactly cellwise; KNN uses
// midpoint tensor quadrature at quad_resolution (0 picks the default).
Estimate cv_moment(const SampleSet& s, int q, const RegressorSpec& reg,
                   std::size_t quad_resolution = 0, RngStream* rng = nullptr);

// test hook: caller supplies the fitted predictor and the exact integral of
// fhat^q; s2 is the correction half itself
Estimate cv_moment_with_oracle(const SampleSet& s2, int q,
                               const std::function<double(const double*)>& fhat,
                               double integral_fhat_q);

// int fhat (exact interval volumes in d=1, midpoint tensor quadrature in d>=2)
// plus mean over the correction half of (y - fhat(x))
Estimate integral_knn_quadrature(const SampleSet& s, std::size_t k,
                                 std::size_t quad_resolution = 0);

// sum_i V(D_i) y_i / k over the fit half plus the same correction; V(D_i)
// exact in d=1 and probe-estimated in d>=2 (probe_n, rng required there).
// fhat(x_i) = (1/k) sum_j 1{x_i in D_j} y_j equals the k-NN prediction by the
// membership duality x_j in T_{k,z} <=> z in D_j, so in d=1 the two forms are
// algebraically identical.
Estimate integral_weights_form(const SampleSet& s, std::size_t k,
                               std::size_t probe_n = 0, RngStream* rng = nullptr,
                               int threads = 0);

}  // namespace cvquad
