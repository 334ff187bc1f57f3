#include "cvquad/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cvquad/parallel.hpp"
#include "cvquad/quadrature.hpp"

namespace cvquad {

namespace {

void check_domain(const double* z, int d) {
  for (int a = 0; a < d; ++a)
    if (!(z[a] >= 0.0 && z[a] <= 1.0))
      throw std::invalid_argument("predict: point outside [0,1]^d");
}

std::size_t grid_flat_index(const double* z, int d, std::size_t cells) {
  std::size_t flat = 0;
  for (int a = 0; a < d; ++a) {
    std::size_t idx = static_cast<std::size_t>(z[a] * static_cast<double>(cells));
    if (idx >= cells) idx = cells - 1;  // z = 1 belongs to the last cell
    flat = flat * cells + idx;
  }
  return flat;
}

}  // namespace

Regressor fit_knn(const SampleSet& s1, std::size_t k) {
  if (s1.ys.size() != s1.n) throw std::invalid_argument("fit_knn: sample has no observations");
  if (s1.n == 0) throw std::invalid_argument("fit_knn: empty training set");
  if (k < 1 || k > s1.n) throw std::invalid_argument("fit_knn: need 1 <= k <= train size");

  Regressor r;
  r.kind_ = RegressorKind::KNN;
  r.d_ = s1.d;
  r.k_ = k;
  const std::size_t n = s1.n;

  if (s1.d == 1) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s1.xs[a] < s1.xs[b]; });
    r.xs_.resize(n);
    r.ys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      r.xs_[i] = s1.xs[order[i]];
      r.ys_[i] = s1.ys[order[i]];
    }
    r.csum_.resize(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) r.csum_[i + 1] = r.csum_[i] + r.ys_[i];
    if (k < n) {
      r.mids_.resize(n - k);
      for (std::size_t i = 0; i + k < n; ++i) r.mids_[i] = 0.5 * (r.xs_[i] + r.xs_[i + k]);
    }
  } else {
    r.xs_ = s1.xs;
    r.ys_ = s1.ys;
  }
  return r;
}

Regressor fit_grid(const SampleSet& s1, std::size_t cells_per_axis, GridFill fill) {
  if (cells_per_axis < 1) throw std::invalid_argument("fit_grid: cells_per_axis must be >= 1");
  if (s1.n > 0 && s1.ys.size() != s1.n)
    throw std::invalid_argument("fit_grid: sample has no observations");
  if (fill == GridFill::NearestCell && s1.d != 1)
    throw std::invalid_argument("fit_grid: NearestCell fill is implemented for d=1 only");

  Regressor r;
  r.kind_ = RegressorKind::Grid;
  r.d_ = s1.d;
  r.cells_ = cells_per_axis;
  r.fill_ = fill;
  r.xs_ = s1.xs;
  r.ys_ = s1.ys;

  const std::size_t total = cube_count(cells_per_axis, r.d_);
  r.cell_means_.assign(total, 0.0);
  r.cell_counts_.assign(total, 0);
  for (std::size_t i = 0; i < s1.n; ++i) {
    const std::size_t flat = grid_flat_index(s1.point(i), r.d_, cells_per_axis);
    r.cell_means_[flat] += s1.ys[i];
    r.cell_counts_[flat] += 1;
  }
  for (std::size_t cidx = 0; cidx < total; ++cidx)
    if (r.cell_counts_[cidx] > 0)
      r.cell_means_[cidx] /= static_cast<double>(r.cell_counts_[cidx]);

  if (fill == GridFill::NearestCell) {
    // two sweeps give the nearest occupied cell on each side; ties take the
    // lower index. Falls back to zero when nothing is occupied at all.
    const std::ptrdiff_t none = -1;
    std::vector<std::ptrdiff_t> left(total, none), right(total, none);
    std::ptrdiff_t last = none;
    for (std::size_t i = 0; i < total; ++i) {
      if (r.cell_counts_[i] > 0) last = static_cast<std::ptrdiff_t>(i);
      left[i] = last;
    }
    last = none;
    for (std::size_t i = total; i-- > 0;) {
      if (r.cell_counts_[i] > 0) last = static_cast<std::ptrdiff_t>(i);
      right[i] = last;
    }
    for (std::size_t i = 0; i < total; ++i) {
      if (r.cell_counts_[i] > 0) continue;
      const std::ptrdiff_t l = left[i], rr = right[i];
      std::ptrdiff_t pick = none;
      if (l == none) pick = rr;
      else if (rr == none) pick = l;
      else {
        const std::ptrdiff_t dl = static_cast<std::ptrdiff_t>(i) - l;
        const std::ptrdiff_t dr = rr - static_cast<std::ptrdiff_t>(i);
        pick = (dl <= dr) ? l : rr;
      }
      r.cell_means_[i] = (pick == none) ? 0.0 : r.cell_means_[static_cast<std::size_t>(pick)];
    }
  }
  return r;
}

double Regressor::predict_knn1(double z) const {
  // window start = #{mids < z}: at a tie z == mids[t] the left window wins,
  // matching the lower-index tie-break
  const std::size_t w = static_cast<std::size_t>(
      std::lower_bound(mids_.begin(), mids_.end(), z) - mids_.begin());
  return window_mean(w);
}

double Regressor::predict_knn_scan(const double* z) const {
  const std::size_t n = ys_.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = train_point(i);
    double d2 = 0.0;
    for (int a = 0; a < d_; ++a) d2 += (z[a] - p[a]) * (z[a] - p[a]);
    dist[i] = {d2, i};
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1),
                   dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k_; ++i) sum += ys_[dist[i].second];
  return sum / static_cast<double>(k_);
}

double Regressor::predict(const double* z) const {
  check_domain(z, d_);
  if (kind_ == RegressorKind::KNN)
    return d_ == 1 ? predict_knn1(z[0]) : predict_knn_scan(z);
  return cell_means_[grid_flat_index(z, d_, cells_)];
}

namespace {

CellVolumes cell_volumes_exact_1d(const Regressor& r) {
  const std::size_t n = r.train_size();
  const std::size_t k = r.k();
  const auto& mids = r.window_mids();
  CellVolumes cv;
  cv.exact = true;
  cv.volumes.resize(n);
  cv.se.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = (i >= k) ? mids[i - k] : 0.0;
    const double hi = (i + k < n) ? mids[i] : 1.0;
    cv.volumes[i] = hi - lo;
  }
  return cv;
}

// shared by the parallel and serial probe paths: counts per chunk in chunk
// order, so the reduction is identical whatever the thread count
CellVolumes cell_volumes_probe(const Regressor& r, std::size_t probe_n, RngStream* rng,
                               int threads, bool serial) {
  if (probe_n == 0 || rng == nullptr)
    throw std::invalid_argument("knn_cell_volumes: d >= 2 needs probe_n and an rng");
  const std::size_t n = r.train_size();
  const std::size_t k = r.k();
  const int d = r.dim();
  const std::uint64_t probe_seed = rng->next_u64();
  const std::size_t chunks = chunk_count(probe_n);
  std::vector<std::vector<std::uint64_t>> counts(chunks);

  auto run_chunk = [&](std::size_t ci) {
    RngStream sub = derive_substream(probe_seed, ci);
    const std::size_t begin = ci * kProbeChunk;
    const std::size_t end = std::min(probe_n, begin + kProbeChunk);
    std::vector<std::uint64_t> local(n, 0);
    std::vector<std::pair<double, std::size_t>> dist(n);
    double z[3];
    for (std::size_t p = begin; p < end; ++p) {
      for (int a = 0; a < d; ++a) z[a] = sub.next_uniform();
      for (std::size_t i = 0; i < n; ++i) {
        const double* pt = r.train_point(i);
        double d2 = 0.0;
        for (int a = 0; a < d; ++a) d2 += (z[a] - pt[a]) * (z[a] - pt[a]);
        dist[i] = {d2, i};
      }
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       dist.end());
      for (std::size_t i = 0; i < k; ++i) local[dist[i].second] += 1;
    }
    counts[ci] = std::move(local);
  };

  if (serial) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    parallel_for(chunks, threads, run_chunk);
  }

  CellVolumes cv;
  cv.exact = false;
  cv.probe_count = probe_n;
  cv.volumes.assign(n, 0.0);
  cv.se.assign(n, 0.0);
  std::vector<std::uint64_t> hits(n, 0);
  for (std::size_t ci = 0; ci < chunks; ++ci)
    for (std::size_t i = 0; i < n; ++i) hits[i] += counts[ci][i];
  const double pn = static_cast<double>(probe_n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phat = static_cast<double>(hits[i]) / pn;
    cv.volumes[i] = phat;
    cv.se[i] = std::sqrt(phat * (1.0 - phat) / pn);
  }
  return cv;
}

}  // namespace

CellVolumes knn_cell_volumes(const Regressor& knn, std::size_t probe_n, RngStream* rng,
                             int threads) {
  if (knn.kind() != RegressorKind::KNN)
    throw std::invalid_argument("knn_cell_volumes: regressor is not KNN");
  if (knn.dim() == 1) return cell_volumes_exact_1d(knn);
  return cell_volumes_probe(knn, probe_n, rng, threads, /*serial=*/false);
}

CellVolumes knn_cell_volumes_serial(const Regressor& knn, std::size_t probe_n, RngStream* rng) {
  if (knn.kind() != RegressorKind::KNN)
    throw std::invalid_argument("knn_cell_volumes: regressor is not KNN");
  if (knn.dim() == 1) return cell_volumes_exact_1d(knn);
  return cell_volumes_probe(knn, probe_n, rng, 0, /*serial=*/true);
}

namespace {

double lr_error_impl(const Regressor& reg, const TestFunction& f, double r,
                     std::size_t probe_n, RngStream& rng, int threads, bool serial) {
  if (probe_n == 0) throw std::invalid_argument("empirical_lr_error: probe_n must be >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("empirical_lr_error: r must be > 0 (inf for sup)");
  if (f.d != reg.dim()) throw std::invalid_argument("empirical_lr_error: dimension mismatch");
  const bool sup = std::isinf(r);
  const int d = reg.dim();
  const std::uint64_t probe_seed = rng.next_u64();
  const std::size_t chunks = chunk_count(probe_n);
  std::vector<double> partial(chunks, 0.0);

  auto run_chunk = [&](std::size_t ci) {
    RngStream sub = derive_substream(probe_seed, ci);
    const std::size_t begin = ci * kProbeChunk;
    const std::size_t end = std::min(probe_n, begin + kProbeChunk);
    double acc = 0.0;
    double z[3];
    for (std::size_t p = begin; p < end; ++p) {
      for (int a = 0; a < d; ++a) z[a] = sub.next_uniform();
      const double diff = std::abs(reg.predict(z) - f.eval(z));
      if (sup)
        acc = std::max(acc, diff);
      else
        acc += std::pow(diff, r);
    }
    partial[ci] = acc;
  };

  if (serial) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    parallel_for(chunks, threads, run_chunk);
  }

  if (sup) {
    double m = 0.0;
    for (double v : partial) m = std::max(m, v);
    return m;
  }
  double sum = 0.0;
  for (double v : partial) sum += v;
  return std::pow(sum / static_cast<double>(probe_n), 1.0 / r);
}

}  // namespace

double empirical_lr_error(const Regressor& reg, const TestFunction& f, double r,
                          std::size_t probe_n, RngStream& rng, int threads) {
  return lr_error_impl(reg, f, r, probe_n, rng, threads, /*serial=*/false);
}

double empirical_lr_error_serial(const Regressor& reg, const TestFunction& f, double r,
                                 std::size_t probe_n, RngStream& rng) {
  return lr_error_impl(reg, f, r, probe_n, rng, 0, /*serial=*/true);
}

}  // namespace cvquad
