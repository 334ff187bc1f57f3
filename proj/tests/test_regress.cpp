// Piecewise-constant regressors: k-NN windows in d=1, scan path in d>=2,
// grid cell means with the two fill policies, window volumes, probe errors.
//
// Oracles: tiny hand-worked configurations, a brute-force nearest-neighbour
// search written inline, and binomial error bands for the probe estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cvquad/regress.hpp"
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

SampleSet random_set(std::size_t n, int d, std::uint64_t stream, double noise = 0.0) {
  RngStream rng(77, stream);
  SampleSet s;
  s.d = d;
  s.n = n;
  s.xs.resize(n * static_cast<std::size_t>(d));
  for (double& v : s.xs) v = rng.next_uniform();
  s.ys.resize(n);
  for (double& v : s.ys) v = rng.next_uniform() + noise * rng.next_normal();
  return s;
}

// independent oracle: mean of the k values nearest to z, ties to lower index
double brute_knn(const SampleSet& s, const double* z, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double d2 = 0.0;
    for (int a = 0; a < s.d; ++a) {
      const double t = z[a] - s.point(i)[a];
      d2 += t * t;
    }
    dist[i] = {d2, i};
  }
  std::sort(dist.begin(), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += s.ys[dist[i].second];
  return sum / static_cast<double>(k);
}

}  // namespace

TEST_CASE("knn d=1: hand-worked windows and tie-breaks") {
  // sorted order: 0.1(y=1), 0.3(y=3), 0.5(y=2), 0.9(y=4); k=2
  const SampleSet s = make_set(1, {0.1, 0.5, 0.3, 0.9}, {1.0, 2.0, 3.0, 4.0});
  const Regressor r = fit_knn(s, 2);
  CHECK(r.kind() == RegressorKind::KNN);
  CHECK(r.k() == 2);
  CHECK(r.train_size() == 4);
  // training data reordered by x
  CHECK(r.train_point(0)[0] == 0.1);
  CHECK(r.train_value(1) == 3.0);
  REQUIRE(r.window_mids().size() == 2);
  CHECK(r.window_mids()[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r.window_mids()[1] == doctest::Approx(0.6).epsilon(1e-15));
  // window means: {1,3}, {3,2}, {2,4}
  CHECK(r.predict1(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.predict1(0.2) == doctest::Approx(2.0).epsilon(1e-15));
  // tie z == mids[0]: the left window wins
  CHECK(r.predict1(0.3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.predict1(0.3001) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(r.predict1(0.6) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(r.predict1(0.7) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(r.predict1(1.0) == doctest::Approx(3.0).epsilon(1e-15));

  CHECK_THROWS_AS(r.predict1(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(r.predict1(1.1), std::invalid_argument);
  CHECK_THROWS_AS(fit_knn(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_knn(s, 5), std::invalid_argument);
  SampleSet unobserved = s;
  unobserved.ys.clear();
  CHECK_THROWS_AS(fit_knn(unobserved, 1), std::invalid_argument);
}

TEST_CASE("knn d=1: agrees with brute-force nearest search on random data") {
  const SampleSet s = random_set(200, 1, 1);
  RngStream rng(77, 2);
  for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{16}, std::size_t{200}}) {
    const Regressor r = fit_knn(s, k);
    for (int t = 0; t < 500; ++t) {
      const double z = rng.next_uniform();
      CHECK(r.predict1(z) == doctest::Approx(brute_knn(s, &z, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn k = n: the prediction is the global mean everywhere") {
  const SampleSet s = random_set(64, 1, 3);
  const Regressor r = fit_knn(s, 64);
  CHECK(r.window_mids().empty());
  double mean = 0.0;
  for (double y : s.ys) mean += y;
  mean /= 64.0;
  for (double z : {0.0, 0.25, 0.777, 1.0})
    CHECK(r.predict1(z) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("knn d=2: scan path agrees with brute force") {
  const SampleSet s = random_set(150, 2, 4);
  RngStream rng(77, 5);
  for (std::size_t k : {std::size_t{1}, std::size_t{4}, std::size_t{9}}) {
    const Regressor r = fit_knn(s, k);
    for (int t = 0; t < 300; ++t) {
      double z[2] = {rng.next_uniform(), rng.next_uniform()};
      CHECK(r.predict(z) == doctest::Approx(brute_knn(s, z, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn volumes d=1: exact intervals, partition of [0,1], sum = k") {
  // two points, k=1: windows split at the midpoint
  const SampleSet tiny = make_set(1, {0.2, 0.8}, {5.0, 7.0});
  const Regressor r1 = fit_knn(tiny, 1);
  const CellVolumes cv1 = knn_cell_volumes(r1);
  CHECK(cv1.exact);
  REQUIRE(cv1.volumes.size() == 2);
  CHECK(cv1.volumes[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cv1.volumes[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cv1.se[0] == 0.0);

  // random sets: sum of volumes == k for several k
  const SampleSet s = random_set(128, 1, 6);
  for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{5},
                        std::size_t{64}, std::size_t{128}}) {
    const Regressor r = fit_knn(s, k);
    const CellVolumes cv = knn_cell_volumes(r);
    double sum = 0.0;
    for (double v : cv.volumes) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(static_cast<double>(k)).epsilon(1e-12));
  }
}

TEST_CASE("knn volumes d=1: membership duality against brute-force neighbours") {
  // D_j = (lo_j, hi_j]; z in D_j must coincide with "x_j among the k nearest"
  const SampleSet s = random_set(60, 1, 7);
  const std::size_t k = 4;
  const Regressor r = fit_knn(s, k);
  const auto& mids = r.window_mids();
  const std::size_t n = r.train_size();
  RngStream rng(77, 8);
  for (int t = 0; t < 400; ++t) {
    const double z = rng.next_uniform();
    // brute-force k-nearest index set (distance ties impossible a.s.)
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i)
      dist[i] = {std::abs(z - r.train_point(i)[0]), i};
    std::sort(dist.begin(), dist.end());
    std::vector<bool> nearest(n, false);
    for (std::size_t i = 0; i < k; ++i) nearest[dist[i].second] = true;

    std::size_t members = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = (j >= k) ? mids[j - k] : 0.0;
      const double hi = (j + k < n) ? mids[j] : 1.0;
      const bool in_dj = (z > lo && z <= hi) || (j < k && z == 0.0);
      if (in_dj) ++members;
      CHECK(in_dj == nearest[j]);
    }
    CHECK(members == k);
  }
}

TEST_CASE("knn volumes d>=2: probe estimate with binomial bands, serial twin") {
  // symmetric two-point configuration: true volumes are (1/2, 1/2)
  const SampleSet two = make_set(2, {0.25, 0.5, 0.75, 0.5}, {1.0, 2.0});
  const Regressor r2 = fit_knn(two, 1);
  RngStream rng_a(9, 1);
  const CellVolumes cv = knn_cell_volumes(r2, 200000, &rng_a, 4);
  CHECK_FALSE(cv.exact);
  CHECK(cv.probe_count == 200000);
  const double se_expected = std::sqrt(0.25 / 200000.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(cv.volumes[i] - 0.5) <= 3.0 * se_expected);
    CHECK(cv.se[i] == doctest::Approx(std::sqrt(cv.volumes[i] * (1.0 - cv.volumes[i]) /
                                                200000.0))
                          .epsilon(1e-12));
  }
  // the probe total is k per probe point, so the sum is k up to rounding
  CHECK(cv.volumes[0] + cv.volumes[1] == doctest::Approx(1.0).epsilon(1e-12));

  // serial reference path is bitwise identical
  RngStream rng_b(9, 1);
  const CellVolumes cvs = knn_cell_volumes_serial(r2, 200000, &rng_b);
  CHECK(cvs.volumes == cv.volumes);
  CHECK(cvs.se == cv.se);

  // larger random config: sum of volumes = k up to float accumulation
  const SampleSet s = random_set(50, 2, 10);
  const Regressor r = fit_knn(s, 3);
  RngStream rng_c(9, 2);
  const CellVolumes big = knn_cell_volumes(r, 100000, &rng_c, 0);
  double sum = 0.0;
  for (double v : big.volumes) sum += v;
  CHECK(sum == doctest::Approx(3.0).epsilon(1e-10));

  RngStream rng_d(9, 3);
  CHECK_THROWS_AS(knn_cell_volumes(r, 0, &rng_d), std::invalid_argument);
  CHECK_THROWS_AS(knn_cell_volumes(r, 1000, nullptr), std::invalid_argument);
  const Regressor g = fit_grid(random_set(10, 1, 11), 4);
  CHECK_THROWS_AS(knn_cell_volumes(g), std::invalid_argument);
}

TEST_CASE("grid d=1: per-cell means, zero fill, nearest-cell fill") {
  const SampleSet s = make_set(1, {0.1, 0.3, 0.35, 0.9}, {4.0, 1.0, 3.0, 8.0});
  const Regressor gz = fit_grid(s, 4, GridFill::Zero);
  CHECK(gz.kind() == RegressorKind::Grid);
  CHECK(gz.cells_per_axis() == 4);
  REQUIRE(gz.cell_means().size() == 4);
  CHECK(gz.cell_counts() == std::vector<std::size_t>{1, 2, 0, 1});
  CHECK(gz.predict1(0.05) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(gz.predict1(0.49) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gz.predict1(0.55) == 0.0);  // empty cell, zero fill
  CHECK(gz.predict1(0.99) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(gz.predict1(1.0) == doctest::Approx(8.0).epsilon(1e-15));  // right edge

  // nearest-cell fill: empty cell 2 ties between cells 1 and 3, lower wins
  const Regressor gn = fit_grid(s, 4, GridFill::NearestCell);
  CHECK(gn.predict1(0.55) == doctest::Approx(2.0).epsilon(1e-15));
  // occupied cells unchanged
  CHECK(gn.predict1(0.05) == doctest::Approx(4.0).epsilon(1e-15));

  // empty cells at the boundary inherit from the only occupied side
  const SampleSet edge = make_set(1, {0.55}, {3.5});
  const Regressor ge = fit_grid(edge, 4, GridFill::NearestCell);
  for (double z : {0.05, 0.3, 0.6, 0.95})
    CHECK(ge.predict1(z) == doctest::Approx(3.5).epsilon(1e-15));

  // a completely empty training set predicts zero under either fill
  const SampleSet none = make_set(1, {}, {});
  CHECK(fit_grid(none, 4, GridFill::Zero).predict1(0.5) == 0.0);
  CHECK(fit_grid(none, 4, GridFill::NearestCell).predict1(0.5) == 0.0);

  CHECK_THROWS_AS(fit_grid(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_grid(random_set(10, 2, 12), 4, GridFill::NearestCell),
                  std::invalid_argument);
}

TEST_CASE("grid d=2: flat index is row-major with the last axis fastest") {
  // one point per quadrant, value encodes (row, col)
  const SampleSet s = make_set(2, {0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75},
                               {11.0, 12.0, 21.0, 22.0});
  const Regressor g = fit_grid(s, 2);
  double z[2] = {0.1, 0.1};
  CHECK(g.predict(z) == 11.0);
  z[1] = 0.9;
  CHECK(g.predict(z) == 12.0);
  z[0] = 0.9;
  CHECK(g.predict(z) == 22.0);
  z[1] = 0.1;
  CHECK(g.predict(z) == 21.0);
  // cell_means storage order: (0,0), (0,1), (1,0), (1,1)
  CHECK(g.cell_means() == std::vector<double>{11.0, 12.0, 21.0, 22.0});
  // z = 1 clamps into the last cell on each axis
  z[0] = 1.0, z[1] = 1.0;
  CHECK(g.predict(z) == 22.0);
}

TEST_CASE("empirical_lr_error: exact gaps, moment arithmetic, serial twin") {
  // regressor trained on constant 2.5 predicts 2.5 everywhere
  SampleSet s = random_set(64, 1, 13);
  for (double& y : s.ys) y = 2.5;
  const Regressor g = fit_grid(s, 1);
  const TestFunction f = make_constant(4.0, 1);
  // |fhat - f| = 1.5 everywhere, so every L^r norm is exactly 1.5
  for (double r : {1.0, 2.0, 3.0, kInf}) {
    RngStream fresh(15, 1);
    CHECK(empirical_lr_error(g, f, r, 5000, fresh) == doctest::Approx(1.5).epsilon(1e-12));
  }

  // fhat = 0 (no training data), f(x) = x: L1 = 1/2, L2 = 1/sqrt(3), sup -> 1
  const Regressor zero = fit_grid(make_set(1, {}, {}), 1);
  const TestFunction lin = make_smooth(SmoothProfile::Linear, 1);
  RngStream r1(15, 2), r2(15, 2), r3(15, 3), r4(15, 4);
  const double l1 = empirical_lr_error(zero, lin, 1.0, 100000, r1);
  const double l1_serial = empirical_lr_error_serial(zero, lin, 1.0, 100000, r2);
  CHECK(l1 == l1_serial);  // bitwise twin
  CHECK(l1 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(empirical_lr_error(zero, lin, 2.0, 100000, r3) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(0.01));
  CHECK(empirical_lr_error(zero, lin, kInf, 100000, r4) > 0.999);

  RngStream r5(15, 5);
  CHECK_THROWS_AS(empirical_lr_error(zero, lin, 0.0, 100, r5), std::invalid_argument);
  CHECK_THROWS_AS(empirical_lr_error(zero, lin, 2.0, 0, r5), std::invalid_argument);
  const TestFunction f2 = make_constant(0.0, 2);
  CHECK_THROWS_AS(empirical_lr_error(zero, f2, 2.0, 100, r5), std::invalid_argument);
}

TEST_CASE("probe paths are invariant to the thread count") {
  const SampleSet s = random_set(40, 2, 14);
  const Regressor r = fit_knn(s, 5);
  RngStream a(16, 1), b(16, 1);
  const CellVolumes v1 = knn_cell_volumes(r, 50000, &a, 1);
  const CellVolumes v8 = knn_cell_volumes(r, 50000, &b, 8);
  CHECK(v1.volumes == v8.volumes);

  const TestFunction f = make_smooth(SmoothProfile::OnePlusBump, 2);
  RngStream c(16, 2), d(16, 2);
  CHECK(empirical_lr_error(r, f, 2.0, 60000, c, 1) ==
        empirical_lr_error(r, f, 2.0, 60000, d, 8));
}
