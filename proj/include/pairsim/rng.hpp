#pragma once

#include <cstdint>

namespace pairsim {

/// splitmix64: tiny deterministic generator with well-mixed streams.
/// Used everywhere synthetic noise is drawn so outputs are reproducible
/// bit-for-bit across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Mixes a base seed with stream indices (sweep point, signal id, ...) so
/// parallel workers draw independent, order-independent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull + stream * 0xd1342543de82ef95ull));
  g.next();
  return g.next();
}

/// Inverse-CDF binomial draw, deterministic given the generator state.
inline int binomial_draw(SplitMix64& g, int n, double p) {
  if (n <= 0) return 0;
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double u = g.uniform01();
  // Walk the pmf with the multiplicative recurrence; sum of pmf is 1, so the
  // loop terminates at k = n even with rounding (u < 1).
  const double ratio = p / (1.0 - p);
  double pmf = 1.0;
  for (int i = 0; i < n; ++i) pmf *= (1.0 - p);
  double cdf = pmf;
  int k = 0;
  while (u >= cdf && k < n) {
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    cdf += pmf;
    ++k;
  }
  return k;
}

}  // namespace pairsim
