#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace laps {

/// Counter-based random stream: the k-th output is mix64(base + k*gamma),
/// so streams derived from distinct (seed, index) pairs are independent and
/// a chain's draws do not depend on how work is scheduled across threads.
class RngStream {
 public:
  explicit RngStream(uint64_t state = 0) : state_(state) {}

  static uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t hash_combine(uint64_t a, uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + mix64(b)));
  }

  static RngStream from_seed(uint64_t seed) { return RngStream(mix64(seed ^ 0x5851f42d4c957f2dULL)); }

  /// Stream owned by one chain of an ensemble.
  static RngStream for_chain(uint64_t seed, uint64_t chain_index) {
    return RngStream(hash_combine(mix64(seed), chain_index));
  }

  /// Dedicated stream for equipartition probe vectors at iteration t.
  static RngStream for_probes(uint64_t seed, uint64_t iteration) {
    return RngStream(hash_combine(hash_combine(mix64(seed), 0x70726f626573ULL), iteration));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Standard normal via Box-Muller. Pairs are consumed per call; a spare
  /// half-pair is dropped at the call boundary so consumption is a fixed
  /// function of the request size.
  double normal() { return normal_pair().first; }

  void fill_normal(std::span<double> out) {
    std::size_t i = 0;
    while (i + 1 < out.size()) {
      auto [a, b] = normal_pair();
      out[i++] = a;
      out[i++] = b;
    }
    if (i < out.size()) out[i] = normal_pair().first;
  }

 private:
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  uint64_t state_;
};

}  // namespace laps
