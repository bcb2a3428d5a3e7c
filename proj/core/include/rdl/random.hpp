#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rdl {

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// mt19937_64 with portable draws. The standard library distributions are
// implementation-defined, so they are not used anywhere results must be
// reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Uniform real in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Standard normal via Box-Muller.
  double normal();

  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace rdl
