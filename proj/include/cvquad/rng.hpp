#pragma once

#include <cstdint>
#include <cmath>

namespace cvquad {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer. Bijective on u64, so distinct inputs give distinct
// outputs; that is what makes substream keys collision-free by construction.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based stream: output i is mix64(key + i*gamma), a pure function of
// (base_seed, stream_index, i). Streams can therefore be handed to worker
// threads in any order without changing the numbers they produce.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t base_seed, std::uint64_t stream_index)
      : key_(detail::mix64((base_seed + detail::kGoldenGamma) ^
                           detail::mix64(stream_index * 0xD1B54A32D192ED03ull + 1))) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++counter_) * detail::kGoldenGamma); }

  // uniform on [0,1), 53 random bits
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; the paired value is cached
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692528676656 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline RngStream derive_substream(std::uint64_t base_seed, std::uint64_t stream_index) {
  return RngStream(base_seed, stream_index);
}

// two-level stream id, e.g. (grid-point index, replication index); adding more
// replications or grid points never renumbers existing cells
inline RngStream derive_substream(std::uint64_t base_seed, std::uint64_t hi, std::uint64_t lo) {
  return RngStream(base_seed, (hi << 32) ^ lo);
}

}  // namespace cvquad
