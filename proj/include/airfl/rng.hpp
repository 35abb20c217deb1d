#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace airfl {

/// SplitMix64 finalizer; used for seed mixing only, never as a generator.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Purpose tags for substream derivation. Every random decision in the
// toolkit draws from a stream keyed by (master_seed, purpose, path...),
// so trial-level parallelism and execution order never change results.
enum class StreamPurpose : std::uint64_t {
  channel = 1,
  noise = 2,
  pilot = 3,
  sgd = 4,
  symbols = 5,
  split = 6,
  datagen = 7,
  misc = 8,
};

/// Derives an engine seed from a master seed and a tag path.
/// seed' = mix64 folded over (master, tag_0, tag_1, ...).
inline std::uint64_t substream_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t tag : path) s = mix64(s ^ (tag + 0x9E3779B97F4A7C15ULL));
  return s;
}

/// Deterministic random stream: mt19937_64 (bit-exact across platforms per
/// the standard) plus portable derived draws. std::*_distribution is
/// deliberately avoided; its output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t master, StreamPurpose purpose,
      std::initializer_list<std::uint64_t> path = {})
      : engine_(derive(master, purpose, path)) {}

  static std::uint64_t derive(std::uint64_t master, StreamPurpose purpose,
                              std::initializer_list<std::uint64_t> path = {}) {
    std::uint64_t s = substream_seed(master, {static_cast<std::uint64_t>(purpose)});
    for (std::uint64_t tag : path) s = mix64(s ^ (tag + 0x9E3779B97F4A7C15ULL));
    return s;
  }

  std::uint64_t u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Marsaglia polar; caches the paired deviate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> cgaussian(double variance) {
    const double s = std::sqrt(variance * 0.5);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

  /// In-place Fisher-Yates shuffle (the documented split/shuffle generator
  /// behind make_split's cross-platform stability guarantee).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// First `count` entries of a shuffled [0, n) index range.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    // partial Fisher-Yates from the front
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace airfl
