#include "gpucb/random.hpp"

#include <stdexcept>

namespace gpucb {
namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream RandomStream::split(std::string_view label) const noexcept {
  return RandomStream(mix64(key_ ^ mix64(fnv1a(label))));
}

RandomStream RandomStream::split(std::uint64_t index) const noexcept {
  return RandomStream(mix64(key_ + mix64(index + kGoldenGamma)));
}

std::uint64_t RandomStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RandomStream::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01();
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_index: empty range");
  }
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = max() - (max() % range + 1) % range;
  std::uint64_t draw = next_u64();
  while (draw > limit) {
    draw = next_u64();
  }
  return static_cast<std::size_t>(draw % range);
}

std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t seed_index) noexcept {
  return RandomStream(mix64(master_seed)).split(seed_index).key();
}

}  // namespace gpucb
