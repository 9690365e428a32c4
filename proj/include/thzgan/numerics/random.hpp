#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace thzgan::num {

/// Seeded 64-bit generator with portable variate transforms. The standard
/// distribution classes are implementation-defined, so the transforms here
/// are spelled out to keep streams reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double exponential(double mean);
  double laplace(double scale);

  // Text form of the engine state, for checkpoints.
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a master seed with a stream name and index into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

}  // namespace thzgan::num
