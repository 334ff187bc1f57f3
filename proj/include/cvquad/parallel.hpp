#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cvquad {

// Probe/trial loops are split into fixed-size chunks; each chunk owns a derived
// RNG substream and writes to its own slot, so results are identical for any
// thread count (and bitwise equal to the serial reference implementations).
inline constexpr std::size_t kProbeChunk = 4096;

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// fn(i) for i in [0, n). fn must only touch state owned by index i.
// threads == 0 keeps the runtime default.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
#ifdef _OPENMP
  const long long count = static_cast<long long>(n);
  if (threads > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  }
#else
  (void)threads;
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

inline std::size_t chunk_count(std::size_t items, std::size_t chunk = kProbeChunk) {
  return (items + chunk - 1) / chunk;
}

}  // namespace cvquad
