#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace proa {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over raw bytes; used to key images by identity.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Small deterministic stream (SplitMix64). Cheap to seed, which matters
/// because every perturbation sample gets its own stream.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RandomStream(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Stream for sample `index` of image `image_key` under run seed `seed`.
/// Independent of how samples are partitioned into batches.
constexpr RandomStream sample_stream(std::uint64_t seed, std::uint64_t image_key,
                                     std::uint64_t index) noexcept {
  return RandomStream(hash_combine(hash_combine(seed, image_key), index));
}

}  // namespace proa
