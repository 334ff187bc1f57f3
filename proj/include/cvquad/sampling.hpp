#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "cvquad/rng.hpp"

namespace cvquad {

struct TestFunction;

// n design points in [0,1]^d (row-major in xs) plus observations.
struct SampleSet {
  int d = 1;
  std::size_t n = 0;
  std::vector<double> xs;       // n*d
  std::vector<double> ys;       // n (empty until observe)
  double sigma = 0.0;           // noise scale used by observe, 0 = exact values
  std::uint64_t stream_key = 0; // key of the stream that drew the points
  std::size_t resampled = 0;    // points redrawn because f(x) was not finite
  bool dropped_odd = false;     // split_halves discarded a trailing point

  const double* point(std::size_t i) const { return xs.data() + i * static_cast<std::size_t>(d); }
};

SampleSet sample_uniform(std::size_t n, int d, RngStream& rng);

// y_i = f(x_i) + sigma z_i with sigma = n^{-gamma} and z_i standard normal;
// gamma = inf means exact observations. The budget n is the full set size, so
// callers split *after* observing. A point where f is not finite (the peak
// singularity has probability zero but a guard anyway) is redrawn and counted.
void observe(SampleSet& s, const TestFunction& f, double gamma, RngStream& rng);

// (fit half, correction half): first floor(n/2) points and the next floor(n/2);
// an odd trailing point is dropped and flagged on both halves.
std::pair<SampleSet, SampleSet> split_halves(const SampleSet& s);

}  // namespace cvquad
