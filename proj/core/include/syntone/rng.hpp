#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace syntone {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derives an independent sub-seed for a named pipeline stage. Stable across
/// platforms: hash of the decimal master seed, a separator and the label.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Portable random source. The standard distributions are implementation
/// defined, so everything the pipeline needs is derived here from the raw
/// mt19937_64 stream.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

private:
  std::mt19937_64 engine_;
};

}  // namespace syntone
