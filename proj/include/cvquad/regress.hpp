#pragma once

#include <cstddef>
#include <vector>

#include "cvquad/sampling.hpp"
#include "cvquad/testfn.hpp"

namespace cvquad {

enum class RegressorKind { KNN, Grid };

// Empty grid cells predict 0 by default. NearestCell lets an empty cell
// inherit the nearest occupied cell's mean (ties to the lower index, d=1
// only); needed when cells scale like the training size, where a constant
// fraction of cells stays empty and the zero fill leaves an O(1) bias.
enum class GridFill { Zero, NearestCell };

// Piecewise-constant predictors fit on a training sample. KNN in d=1 keeps the
// points sorted with the k-window midpoints precomputed, so a prediction is a
// binary search; d>=2 scans with (distance, index) tie-breaking. Grid averages
// the training values per cell of a uniform cells^d partition.
class Regressor {
 public:
  RegressorKind kind() const { return kind_; }
  int dim() const { return d_; }
  std::size_t k() const { return k_; }
  std::size_t cells_per_axis() const { return cells_; }
  std::size_t train_size() const { return ys_.size(); }

  // training data in the regressor's internal order (d=1 KNN: sorted by x)
  const double* train_point(std::size_t i) const { return xs_.data() + i * static_cast<std::size_t>(d_); }
  double train_value(std::size_t i) const { return ys_[i]; }

  double predict(const double* z) const;  // z must lie in [0,1]^d
  double predict1(double z) const { return predict(&z); }

  // d=1 KNN internals used for exact integration: D_i = (mids[i-k], mids[i]]
  // clipped to [0,1], where mids[t] = (x_(t) + x_(t+k))/2 over sorted points
  const std::vector<double>& window_mids() const { return mids_; }
  double window_mean(std::size_t w) const { return (csum_[w + k_] - csum_[w]) / static_cast<double>(k_); }

  const std::vector<double>& cell_means() const { return cell_means_; }
  const std::vector<std::size_t>& cell_counts() const { return cell_counts_; }

  friend Regressor fit_knn(const SampleSet& s1, std::size_t k);
  friend Regressor fit_grid(const SampleSet& s1, std::size_t cells_per_axis, GridFill fill);

 private:
  RegressorKind kind_ = RegressorKind::Grid;
  int d_ = 1;
  std::size_t k_ = 1;
  std::size_t cells_ = 1;
  GridFill fill_ = GridFill::Zero;
  std::vector<double> xs_, ys_;
  std::vector<double> csum_, mids_;          // KNN d=1
  std::vector<double> cell_means_;           // Grid (after fill)
  std::vector<std::size_t> cell_counts_;

  double predict_knn1(double z) const;
  double predict_knn_scan(const double* z) const;
};

Regressor fit_knn(const SampleSet& s1, std::size_t k);
Regressor fit_grid(const SampleSet& s1, std::size_t cells_per_axis,
                   GridFill fill = GridFill::Zero);

// V(D_i) for every training point: D_i = {z : x_i is among the k nearest
// neighbours of z}. Exact interval lengths in d=1; probe Monte Carlo with
// per-volume standard errors in d>=2. Volumes follow the regressor's internal
// training order. sum_i V(D_i) = k because every probe point has exactly k
// neighbours.
struct CellVolumes {
  std::vector<double> volumes;
  std::vector<double> se;     // 0 when exact
  std::size_t probe_count = 0;
  bool exact = false;
};
CellVolumes knn_cell_volumes(const Regressor& knn, std::size_t probe_n = 0,
                             RngStream* rng = nullptr, int threads = 0);
CellVolumes knn_cell_volumes_serial(const Regressor& knn, std::size_t probe_n = 0,
                                    RngStream* rng = nullptr);

// (mean_z |fhat(z) - f(z)|^r)^{1/r} over probe_n uniform probes; r = inf takes
// the max. The probe stream is chunked so the result is thread-count invariant.
double empirical_lr_error(const Regressor& reg, const TestFunction& f, double r,
                          std::size_t probe_n, RngStream& rng, int threads = 0);
double empirical_lr_error_serial(const Regressor& reg, const TestFunction& f, double r,
                                 std::size_t probe_n, RngStream& rng);

}  // namespace cvquad
