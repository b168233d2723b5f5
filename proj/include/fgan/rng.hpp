#pragma once

#include <cstdint>
#include <string_view>

namespace fgan {

/// Lightweight deterministic PRNG (splitmix64 core). We deliberately avoid
/// <random> distributions: their output is implementation-defined, and the
/// whole pipeline promises bit-identical results for a given seed.
///
/// Every consumer derives its own stream from the root seed by a fixed label,
/// so adding a consumer never perturbs the draws of existing ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_unit();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi] (inclusive).
  int next_int(int lo, int hi);

  /// Gaussian via Box-Muller; second draw of each pair is cached.
  float normal(float mean, float stddev);

  /// Independent stream keyed by (root seed, label).
  Rng derive(std::string_view label) const;

 private:
  std::uint64_t root_;
  std::uint64_t state_;
  bool have_spare_ = false;
  float spare_ = 0.0f;
};

/// FNV-1a of a label, for stream derivation.
std::uint64_t hash_label(std::string_view s);

/// Stateless position hash; used for per-pixel noise fields where a stream
/// would entangle unrelated pixels.
std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                       std::uint64_t d = 0);

/// hash_mix folded to [0, 1).
double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                 std::uint64_t d = 0);

}  // namespace fgan
