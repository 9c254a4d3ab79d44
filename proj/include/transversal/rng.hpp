#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace transversal {

/// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Keyed random stream.
///
/// Every stream carries a 64-bit key. `fork(tag)` derives a child stream from
/// the key alone, without advancing the parent, so per-sample streams
/// `rng.fork(i)` are identical no matter which worker thread draws them.
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix64(seed)), engine_(key_) {}

  [[nodiscard]] Rng fork(std::uint64_t tag) const {
    return Rng(Key{mix64(key_ ^ mix64(tag + 0x632be59bd9b4e019ULL))});
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit Rng(Key k) : key_(k.value), engine_(key_) {}

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace transversal
