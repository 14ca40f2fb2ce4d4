#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace styleaug {

// SplitMix64. Pinned here (rather than the platform's default engine) so that
// plans, shuffles and review draws are bit-identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, n) by rejection; n must be >= 1.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Derives the seed of an independent stream as the first 8 bytes
// (little-endian) of SHA-256("styleaug-rng|<seed>|<tag1>|<tag2>|...").
// Every seeded draw in the pipeline names its purpose through the tags, so
// adding one consumer never perturbs another.
std::uint64_t stream_seed(std::uint64_t root,
                          std::initializer_list<std::string_view> tags);

// Partial Fisher-Yates: removes k uniformly chosen elements from pool
// (without replacement) and returns them in draw order.
template <typename T>
std::vector<T> take_sample(std::vector<T>& pool, std::size_t k, SplitMix64& g) {
  if (k > pool.size()) k = pool.size();
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(g.bounded(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<T> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k,
                                          SplitMix64& g) {
  return take_sample(pool, k, g);
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(g.bounded(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace styleaug
