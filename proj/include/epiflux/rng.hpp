#pragma once

#include <cstdint>
#include <random>

namespace epiflux {

// Deterministic pseudo-random stream. Ensembles address streams by
// (seed, stream index): realization i uses stream i. Identical pairs give
// identical draw sequences; distinct indices give unrelated sequences.
//
// Variates are derived from the raw 64-bit engine output (never from
// std::*_distribution), so sequences are reproducible bit-for-bit across
// standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

  // Exponential waiting time; rate must be positive.
  double exponential(double rate);

  // Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace epiflux
