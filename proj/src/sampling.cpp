#include "cvquad/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "cvquad/testfn.hpp"

namespace cvquad {

SampleSet sample_uniform(std::size_t n, int d, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_uniform: n must be >= 1");
  if (d < 1) throw std::invalid_argument("sample_uniform: d must be >= 1");
  SampleSet s;
  s.d = d;
  s.n = n;
  s.stream_key = rng.key();
  s.xs.resize(n * static_cast<std::size_t>(d));
  for (double& v : s.xs) v = rng.next_uniform();
  return s;
}

void observe(SampleSet& s, const TestFunction& f, double gamma, RngStream& rng) {
  if (f.d != s.d) throw std::invalid_argument("observe: dimension mismatch");
  if (std::isnan(gamma) || gamma < 0.0)
    throw std::invalid_argument("observe: gamma must be >= 0 or inf");
  const bool noiseless = std::isinf(gamma);
  s.sigma = noiseless ? 0.0 : std::pow(static_cast<double>(s.n), -gamma);
  s.ys.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double* x = s.xs.data() + i * static_cast<std::size_t>(s.d);
    double v = f.eval(x);
    // a singular hit has probability zero under the uniform design; redraw
    while (!std::isfinite(v)) {
      for (int a = 0; a < s.d; ++a) x[a] = rng.next_uniform();
      v = f.eval(x);
      ++s.resampled;
    }
    s.ys[i] = noiseless ? v : v + s.sigma * rng.next_normal();
  }
}

std::pair<SampleSet, SampleSet> split_halves(const SampleSet& s) {
  if (s.ys.size() != s.n) throw std::invalid_argument("split_halves: observe the sample first");
  if (s.n < 2) throw std::invalid_argument("split_halves: need n >= 2");
  const std::size_t half = s.n / 2;
  const bool dropped = (s.n % 2) != 0;
  const std::size_t dim = static_cast<std::size_t>(s.d);
  auto take = [&](std::size_t from) {
    SampleSet h;
    h.d = s.d;
    h.n = half;
    h.sigma = s.sigma;
    h.stream_key = s.stream_key;
    h.resampled = s.resampled;
    h.dropped_odd = dropped;
    h.xs.assign(s.xs.begin() + static_cast<std::ptrdiff_t>(from * dim),
                s.xs.begin() + static_cast<std::ptrdiff_t>((from + half) * dim));
    h.ys.assign(s.ys.begin() + static_cast<std::ptrdiff_t>(from),
                s.ys.begin() + static_cast<std::ptrdiff_t>(from + half));
    return h;
  };
  return {take(0), take(half)};
}

}  // namespace cvquad
