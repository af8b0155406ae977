#pragma once

#include <cstdint>

namespace cpt {

// splitmix64 finalizer; also used to derive independent seeds.
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Deterministic stream generator (splitmix64). Self-contained on purpose:
// results must replay bit-identically across platforms and standard library
// versions, so no std::uniform_* anywhere.
class Rng {
 public:
  Rng() : state_(0) {}
  explicit Rng(uint64_t seed) : state_(seed) {}

  void reseed(uint64_t seed) { state_ = seed; }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Unbiased integer in [0, bound), bound >= 1.
  uint64_t below(uint64_t bound) {
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // Integer in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  // [0, 1), 53-bit resolution; exact on IEEE doubles.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

 private:
  uint64_t state_;
};

// Seed for the private random stream of a node within one attempt of a
// protocol. Distinct (seed, node, attempt) triples must map to distinct
// outputs over desk-scale inputs; tests scan for collisions.
inline uint64_t derive_node_seed(uint64_t global_seed, uint64_t node, uint64_t attempt) {
  uint64_t h = global_seed;
  h = mix64(h ^ (0xA0761D6478BD642FULL * (node + 1)));
  h = mix64(h ^ (0xE7037ED1A0B428DBULL * (attempt + 1)));
  return mix64(h);
}

// Seed for trial t of a batch run.
inline uint64_t derive_trial_seed(uint64_t base_seed, uint64_t trial) {
  return mix64(base_seed ^ mix64(0x5EEDBA5EULL + trial * 0x9E3779B97F4A7C15ULL));
}

}  // namespace cpt
