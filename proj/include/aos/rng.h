#ifndef AOS_RNG_H_
#define AOS_RNG_H_

#include <cstdint>
#include <string_view>

namespace aos {

// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed, e.g. derive_seed(seed, "forest").
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return hash_combine(seed, hash_string(stream));
}

// Uniform double in [0, 1) from 53 high bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based draw: the value depends only on (seed, counter), so any
// pixel or element can be generated independently of evaluation order.
constexpr double unit_at(std::uint64_t seed, std::uint64_t counter) {
  return to_unit(hash_combine(seed, counter));
}

// Sequential generator over the same mixer. Distributions are implemented
// here rather than with <random> so draws are identical across standard
// library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double uniform() { return to_unit(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace aos

#endif  // AOS_RNG_H_
