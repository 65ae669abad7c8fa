#pragma once

#include <cstdint>

namespace samrobust {

/// Counter-based random stream. Every draw is a pure function of
/// (seed, stream, counter), so results do not depend on the platform's
/// <random> implementation and any sub-stream can be reconstructed
/// independently (per sample, per epoch, per replicate).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Standard normal via inverse CDF of a uniform draw.
  double normal() noexcept;

  /// Unbiased integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and a tag; used to give each
/// phase of an experiment (data, init, shuffling, attacks) its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Inverse of the standard normal CDF for p in (0, 1).
double inverse_normal_cdf(double p) noexcept;

}  // namespace samrobust
