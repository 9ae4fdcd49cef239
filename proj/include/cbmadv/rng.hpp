#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cbmadv {

// All randomness in the library flows through this wrapper. std::mt19937_64 is
// bit-exact across conforming standard libraries, and the uniform/normal
// mappings below are hand-rolled because the std distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n). Modulo bias is negligible for the sizes used here.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Fisher-Yates; std::shuffle is avoided because its draw sequence is
  // implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = uniform_index(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent stream seed from a master seed and a salt. Distinct
// salts give statistically unrelated streams, so subsystems can draw from the
// same master seed without coupling their sequences.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  return detail::splitmix64(detail::splitmix64(master) ^ detail::splitmix64(salt * 0x9e3779b97f4a7c15ULL + 1));
}

// Salt namespace bases. Keep these spaced apart; some call sites add small
// offsets (epoch, fold, tree or class index) on top of a base.
namespace seeds {
inline constexpr std::uint64_t kSplitBase = 0x100;       // + class index
inline constexpr std::uint64_t kKfold = 0x200;
inline constexpr std::uint64_t kMlpInit = 0x300;
inline constexpr std::uint64_t kMlpEpochBase = 0x400;    // + epoch index
inline constexpr std::uint64_t kCvFoldBase = 0x10000;    // + fold index
inline constexpr std::uint64_t kForestTreeBase = 0x20000;  // + tree index
inline constexpr std::uint64_t kDefenseSelect = 0x30000;
inline constexpr std::uint64_t kSynthClassBase = 0x40000;  // + class index
}  // namespace seeds

}  // namespace cbmadv
