#pragma once

#include <cstdint>
#include <random>

namespace empmin {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for replication `replication` at sample size `n` of a study seeded
/// with `master`. Pure function; streams for distinct (n, replication) pairs
/// are independent for practical purposes.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t replication) noexcept;

/// mt19937_64 with fixed conversions to uniform and Gaussian variates, so a
/// seed reproduces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method; variates come in pairs
  /// and the second one is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace empmin
