#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace gpucb {

/// Keyed counter-based generator. The i-th output is a SplitMix64 finalizer of
/// (key + i * golden_gamma), so a stream is fully described by (key, counter)
/// and child streams are derived from the key alone. Outputs are identical on
/// every platform and independent of the thread that consumes them.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  /// Child stream for a named purpose ("objective", "initial", ...).
  [[nodiscard]] RandomStream split(std::string_view label) const noexcept;
  /// Child stream for an integer index (seed index, run index).
  [[nodiscard]] RandomStream split(std::uint64_t index) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Unbiased uniform draw from {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  // UniformRandomBitGenerator
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Root key of the stream used by run `seed_index` of an experiment.
std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t seed_index) noexcept;

}  // namespace gpucb
