#pragma once

#include <cmath>
#include <cstdint>

namespace mi2p {

// What a random stream is consumed for. Streams are derived per
// (seed, trial, iteration, purpose), so e.g. helper noise never perturbs the
// direction sequence and trials can run in any order or in parallel.
enum class StreamPurpose : std::uint64_t {
  Direction = 1,
  Batch = 2,
  Helper = 3,
  Probe = 4,
  Pilot = 5,
  Dataset = 6,
  Init = 7,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based stream (splitmix64). Cheap to fork, stateful within one
// consumer, never shared across concurrent callers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(detail::mix64(seed)) {}

  static RngStream derive(std::uint64_t seed, std::uint64_t trial,
                          std::uint64_t iteration, StreamPurpose purpose) {
    std::uint64_t h = detail::mix64(seed);
    h = detail::mix64(h ^ (0x9E3779B97F4A7C15ull + trial));
    h = detail::mix64(h ^ (0xC2B2AE3D27D4EB4Full + iteration));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(purpose));
    RngStream r(0);
    r.state_ = h;
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller, second value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace mi2p
