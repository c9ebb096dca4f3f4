#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rnco {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded RNG with fixed integer/float mappings. std::mt19937_64 provides the
// bit stream; the value mappings are implemented here rather than with
// std::uniform_*_distribution, whose output is implementation-defined.
// Substreams are derived with splitmix64 so per-instance generation is
// order-independent and reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    Rng r(0);
    r.gen_.seed(splitmix64(splitmix64(seed) + 0x632be59bd9b4e019ull * (index + 1)));
    return r;
  }

  std::uint64_t bits() { return gen_(); }

  // uniform double in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (~0ull / n);
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  // inclusive range
  int uniform_int(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rnco
