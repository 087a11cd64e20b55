#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace evotext {

// Seeded random source used everywhere randomness is needed. All helpers are
// built from raw mt19937_64 draws instead of std::*_distribution so that the
// stream of values is identical across standard library implementations.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, bound). bound must be > 0.
  uint64_t below(uint64_t bound);

  // Double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Seed for a derived generator. Consumes one draw.
  uint64_t fork_seed() { return next_u64(); }

  // Engine state round-trip, used by run checkpoints.
  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

// FNV-1a 64-bit. Stable across platforms; used for gene fingerprints and
// request digests.
uint64_t fnv1a64(const std::string& data);

// Lower-case hex rendering of a 64-bit hash.
std::string hash_hex(uint64_t h);

}  // namespace evotext
