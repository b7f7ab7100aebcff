#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace hypoloop {

// SplitMix64 generator. Used everywhere instead of <random> distributions so
// that sequences are identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). n must be > 0.
  size_t next_index(size_t n) { return static_cast<size_t>(next_u64() % n); }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = next_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_;
};

// FNV-1a, the project's stable string hash (std::hash is not portable).
inline uint64_t stable_hash(std::string_view text, uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One root seed, split per subsystem and per round so that resuming a run at
// any round reproduces the same streams without replaying earlier rounds.
inline uint64_t derive_seed(uint64_t root, std::string_view subsystem, uint64_t round) {
  uint64_t h = stable_hash(subsystem, root ^ 0x9e3779b97f4a7c15ULL);
  h ^= round + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return Rng(h).next_u64();
}

}  // namespace hypoloop
