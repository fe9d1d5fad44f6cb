#pragma once

#include <cstdint>
#include <random>

namespace dscjscc {

// Mixes a base seed with a stream tag and index; used to derive independent,
// reproducible generator seeds (shuffling, channel noise, per-image evaluation).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

// mt19937_64 with hand-rolled distributions. The standard distributions are
// implementation-defined, so they are avoided to keep runs bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace dscjscc
