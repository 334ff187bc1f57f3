// Moment and integral estimators: plain MC, truncated MC, the regression
// control variate, and the two k-NN quadrature forms.
//
// Oracles: hand-computed three-point examples, algebraic collapse identities
// (zero regressor, global-mean regressor, exact-oracle regressor), closed-form
// moments from the test-function suite, and replication means with 3-sigma
// bands computed inline.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cvquad/estimators.hpp"
#include "cvquad/quadrature.hpp"
#include "cvquad/testfn.hpp"
#include "doctest.h"

using namespace cvquad;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SampleSet make_set(int d, std::vector<double> xs, std::vector<double> ys) {
  SampleSet s;
  s.d = d;
  s.n = ys.size();
  s.xs = std::move(xs);
  s.ys = std::move(ys);
  return s;
}

SampleSet draw(std::size_t n, int d, const TestFunction& f, double gamma,
               std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  SampleSet s = sample_uniform(n, d, rng);
  observe(s, f, gamma, rng);
  return s;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(std::string(method_name(Method::PlainMC)) == "plain_mc");
  CHECK(std::string(method_name(Method::TruncatedMC)) == "truncated_mc");
  CHECK(std::string(method_name(Method::CVMoment)) == "cv_moment");
  CHECK(std::string(method_name(Method::KnnQuadratureDirect)) == "knn_quadrature");
  CHECK(std::string(method_name(Method::KnnQuadratureWeights)) == "knn_quadrature_weights");
}

TEST_CASE("plain and truncated MC: three-point hand examples") {
  const SampleSet s = make_set(1, {0.1, 0.2, 0.3}, {0.5, -2.0, 3.0});
  const Estimate p1 = plain_mc_moment(s, 1);
  CHECK(p1.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p1.method == Method::PlainMC);
  CHECK(p1.n == 3);
  CHECK(p1.q == 1);
  CHECK(plain_mc_moment(s, 2).value == doctest::Approx(13.25 / 3.0).epsilon(1e-15));
  CHECK(plain_mc_moment(s, 3).value == doctest::Approx(19.125 / 3.0).epsilon(1e-15));

  // clamp to [-1,1]: {0.5, -1, 1} -> q=2 mean 0.75, q=3 mean 0.125/3
  const Estimate t2 = truncated_mc_moment(s, 2, 1.0);
  CHECK(t2.value == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(t2.truncation == 1.0);
  CHECK(t2.method == Method::TruncatedMC);
  CHECK(truncated_mc_moment(s, 3, 1.0).value == doctest::Approx(0.125 / 3.0).epsilon(1e-14));
  // clamp to [-2.5, 2.5]: {0.5, -2, 2.5} -> q=1 mean 1/3
  CHECK(truncated_mc_moment(s, 1, 2.5).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  SampleSet empty;
  CHECK_THROWS_AS(plain_mc_moment(empty, 1), std::invalid_argument);
  CHECK_THROWS_AS(plain_mc_moment(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(truncated_mc_moment(s, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(truncated_mc_moment(s, 1, -2.0), std::invalid_argument);
}

TEST_CASE("truncated MC: |estimate| <= M^q over 10^4 random cases") {
  RngStream rng(31, 1);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + (rng.next_u64() % 20);
    SampleSet s;
    s.d = 1;
    s.n = n;
    s.xs.resize(n);
    s.ys.resize(n);
    for (double& x : s.xs) x = rng.next_uniform();
    for (double& y : s.ys) {
      // heavy-tailed values: 1/u is Pareto-like, with random sign
      const double u = rng.next_uniform() + 1e-12;
      y = (rng.next_u64() & 1 ? 1.0 : -1.0) / u;
    }
    const double m_trunc = 0.01 + 10.0 * rng.next_uniform();
    const int q = 1 + static_cast<int>(rng.next_u64() % 4);
    const Estimate e = truncated_mc_moment(s, q, m_trunc);
    CHECK(std::abs(e.value) <= ipow(m_trunc, q) + 1e-12);
  }
}

TEST_CASE("truncated MC on nonnegative data: monotone in M, capped by plain MC") {
  const TestFunction peak = make_peak(0.18, {0.0}, 1, 3, 4.0, 0.05);
  const SampleSet s = draw(2000, 1, peak, kInf, 31, 2);
  const Estimate plain = plain_mc_moment(s, 3);
  double prev = 0.0;
  for (double m_trunc : {0.5, 1.0, 2.0, 4.0, 8.0, 1e6}) {
    const double v = truncated_mc_moment(s, 3, m_trunc).value;
    CHECK(v >= prev - 1e-15);
    CHECK(v <= plain.value + 1e-15);
    prev = v;
  }
  // once M dominates every draw the truncated estimate equals the plain one
  double top = 0.0;
  for (double y : s.ys) top = std::max(top, std::abs(y));
  CHECK(truncated_mc_moment(s, 3, top).value == doctest::Approx(plain.value).epsilon(1e-15));
}

TEST_CASE("default truncation schedule: value and named failure") {
  // n = 10^4, s = 0.05, p = 4, d = 1: M = n^{1/4 - 0.05} = 10^{0.8}
  CHECK(default_truncation(10000, 0.05, 4.0, 1) ==
        doctest::Approx(std::pow(10.0, 0.8)).epsilon(1e-12));
  CHECK(default_truncation(10000, 0.05, 4.0, 1, 2.0) ==
        doctest::Approx(2.0 * std::pow(10.0, 0.8)).epsilon(1e-12));
  CHECK(default_truncation(1, 0.05, 4.0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  try {
    default_truncation(100, 1.0, 4.0, 1);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("requires s/d < 1/p") != std::string::npos);
  }
  CHECK_THROWS_AS(default_truncation(100, 0.05, 4.0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("default quadrature resolution") {
  CHECK(default_quad_resolution(1, 1) == 1024);
  CHECK(default_quad_resolution(1, 500) == 2000);
  CHECK(default_quad_resolution(2, 1) == 32);
  CHECK(default_quad_resolution(2, 100) == 400);
  CHECK(default_quad_resolution(3, 1) == 11);
}

TEST_CASE("cv with a zero regressor collapses to plain MC on the correction half") {
  const TestFunction f = make_smooth(SmoothProfile::Sin2PiPlus2, 1);
  for (int q : {1, 2, 3}) {
    const SampleSet s = draw(512, 1, f, 0.3, 31, 10 + static_cast<std::uint64_t>(q));
    const auto halves = split_halves(s);
    const Estimate cv = cv_moment_with_oracle(
        halves.second, q, [](const double*) { return 0.0; }, 0.0);
    const Estimate mc = plain_mc_moment(halves.second, q);
    CHECK(std::abs(cv.value - mc.value) <= 1e-12);
    CHECK(cv.integral_part == 0.0);
  }
}

TEST_CASE("cv with the exact regressor has zero correction and exact value") {
  // fhat == f == constant c: every correction term is identically zero
  const TestFunction f = make_constant(-1.3, 1);
  const SampleSet s = draw(256, 1, f, kInf, 31, 20);
  const auto halves = split_halves(s);
  const double integral = ipow(-1.3, 3);
  const Estimate cv = cv_moment_with_oracle(
      halves.second, 3, [](const double*) { return -1.3; }, integral);
  CHECK(cv.correction_part == 0.0);
  CHECK(cv.value == doctest::Approx(integral).epsilon(1e-15));
}

TEST_CASE("cv with k = half collapses to plain MC on the correction half") {
  // the k-NN window then covers all of S1: fhat is the S1 global mean, its
  // q-th power integrates to itself, and the value telescopes to plain MC(S2)
  const TestFunction f = make_smooth(SmoothProfile::OnePlusBump, 1);
  const SampleSet s = draw(256, 1, f, 0.25, 31, 30);
  RegressorSpec spec;
  spec.kind = RegressorKind::KNN;
  spec.k = 128;
  for (int q : {1, 2, 3}) {
    const Estimate cv = cv_moment(s, q, spec);
    const auto halves = split_halves(s);
    const Estimate mc = plain_mc_moment(halves.second, q);
    CHECK(cv.value == doctest::Approx(mc.value).epsilon(1e-12));
    CHECK(cv.k == 128);
  }
  // same collapse for the integral quadrature forms
  const Estimate direct = integral_knn_quadrature(s, 128);
  const Estimate weights = integral_weights_form(s, 128);
  const Estimate mc1 = plain_mc_moment(split_halves(s).second, 1);
  CHECK(direct.value == doctest::Approx(mc1.value).epsilon(1e-12));
  CHECK(weights.value == doctest::Approx(mc1.value).epsilon(1e-12));
}

TEST_CASE("cv estimate metadata and value decomposition") {
  const TestFunction f = make_smooth(SmoothProfile::Sin2PiPlus2, 1);
  const SampleSet s = draw(256, 1, f, kInf, 31, 40);
  RegressorSpec grid;
  grid.kind = RegressorKind::Grid;
  grid.cells_per_axis = 16;
  const Estimate e = cv_moment(s, 2, grid);
  CHECK(e.method == Method::CVMoment);
  CHECK(e.n == 256);
  CHECK(e.q == 2);
  CHECK(e.cells == 16);
  CHECK(e.value == doctest::Approx(e.integral_part + e.correction_part).epsilon(1e-15));
  // grid cv at modest cells already lands near the true moment 4.5
  CHECK(e.value == doctest::Approx(4.5).epsilon(0.05));

  RegressorSpec knn;
  knn.kind = RegressorKind::KNN;
  knn.k = 8;
  const Estimate e2 = cv_moment(s, 2, knn, 2048);
  CHECK(e2.quad_resolution == 2048);
  CHECK(e2.k == 8);
  CHECK(e2.value == doctest::Approx(4.5).epsilon(0.05));

  CHECK_THROWS_AS(cv_moment(s, 0, grid), std::invalid_argument);
  SampleSet empty;
  CHECK_THROWS_AS(cv_moment(empty, 1, grid), std::invalid_argument);
  // regressor k larger than the fit half propagates the fit error
  RegressorSpec huge;
  huge.kind = RegressorKind::KNN;
  huge.k = 200;
  CHECK_THROWS_AS(cv_moment(s, 1, huge), std::invalid_argument);
}

TEST_CASE("cv replication mean matches the true moment at 3 sigma (noiseless)") {
  const TestFunction f = make_smooth(SmoothProfile::Sin2PiPlus2, 1);
  const double truth = 4.5;  // int (sin 2 pi x + 2)^2
  RegressorSpec spec;
  spec.kind = RegressorKind::Grid;
  spec.cells_per_axis = 32;
  const std::size_t reps = 300;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const SampleSet s = draw(256, 1, f, kInf, 141, r);
    const double v = cv_moment(s, 2, spec).value;
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / reps;
  const double var = sumsq / reps - mean * mean;
  const double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - truth) <= 3.0 * se);
}

TEST_CASE("knn quadrature d=1: duality makes direct and weights forms agree") {
  const TestFunction f = make_smooth(SmoothProfile::Tent, 1);
  for (std::size_t k : {std::size_t{1}, std::size_t{4}, std::size_t{32}}) {
    const SampleSet s = draw(512, 1, f, 0.5, 31, 50 + k);
    const Estimate direct = integral_knn_quadrature(s, k);
    const Estimate weights = integral_weights_form(s, k);
    CHECK(std::abs(direct.value - weights.value) <= 1e-10);
    CHECK(direct.method == Method::KnnQuadratureDirect);
    CHECK(weights.method == Method::KnnQuadratureWeights);
    CHECK(direct.q == 1);

    // the weighted integral equals a brute-force midpoint integral of the
    // fitted predictor, up to the piecewise-constant boundary resolution
    const auto halves = split_halves(s);
    const Regressor fit = fit_knn(halves.first, k);
    const std::size_t res = 1 << 20;
    double quad = 0.0;
    for (std::size_t i = 0; i < res; ++i) {
      const double z = (static_cast<double>(i) + 0.5) / static_cast<double>(res);
      quad += fit.predict1(z);
    }
    quad /= static_cast<double>(res);
    CHECK(direct.integral_part == doctest::Approx(quad).epsilon(5e-4));
  }
}

TEST_CASE("knn quadrature d=2: weights form tracks the direct form within noise") {
  const TestFunction f = make_smooth(SmoothProfile::OnePlusBump, 2);
  const SampleSet s = draw(256, 2, f, kInf, 31, 60);
  const Estimate direct = integral_knn_quadrature(s, 4);
  RngStream rng(31, 61);
  const Estimate weights = integral_weights_form(s, 4, 200000, &rng, 4);
  // both target int fhat; the probe-volume noise dominates the gap
  CHECK(weights.value == doctest::Approx(direct.value).epsilon(0.02));
  // weights path is thread-invariant
  RngStream rng2(31, 61);
  const Estimate weights1 = integral_weights_form(s, 4, 200000, &rng2, 1);
  CHECK(weights.value == weights1.value);
  // d >= 2 without a probe budget cannot build volumes
  CHECK_THROWS_AS(integral_weights_form(s, 4), std::invalid_argument);
}

TEST_CASE("knn quadrature replication mean is unbiased for the integral") {
  const TestFunction f = make_smooth(SmoothProfile::Sin2PiPlus2, 1);
  const std::size_t reps = 300;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const SampleSet s = draw(128, 1, f, 0.25, 151, r);
    const double v = integral_knn_quadrature(s, 4).value;
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 2.0) <= 3.0 * se);
}
