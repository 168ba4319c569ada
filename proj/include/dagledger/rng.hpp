#pragma once

#include <array>
#include <cstdint>

namespace dagledger {

// Counter-based random numbers built on Philox4x32-10 (Salmon et al., SC'11).
//
// Stream layout used throughout the simulator:
//   master seed --derive_trial_seed(point hash, trial index)--> trial seed
//   trial seed  --> one SimRng owned by that trial's simulation
//   the simulation consumes draws in a fixed order (see ledger.hpp), so a
//   trajectory depends only on (params, trial seed) and never on scheduling.

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// The raw Philox4x32 bijection with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Keyed 128-bit hash of (a, b) reduced to 64 bits. Used for stream splitting.
std::uint64_t philox_hash(std::uint64_t key, std::uint64_t a, std::uint64_t b);

/// Seed for one trial of one parameter point.
std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                std::uint64_t point_hash,
                                std::uint64_t trial_index);

/// Sequential generator over a Philox stream: key = seed, counter = 0,1,2,...
///
/// Distribution helpers are implemented here rather than through <random>
/// distributions, whose algorithms differ between standard libraries.
class SimRng {
public:
  explicit SimRng(std::uint64_t seed);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// True with probability p. p <= 0 is always false and p >= 1 always true,
  /// but one draw is consumed either way.
  bool bernoulli(double p);

  /// Poisson(mean) by Knuth's product-of-uniforms method. Intended for the
  /// small means this simulator uses.
  std::uint32_t poisson(double mean);

  /// 32-bit words consumed so far.
  std::uint64_t draws() const { return draws_; }

private:
  void refill();

  PhiloxKey key_{};
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  unsigned used_ = 4;
  std::uint64_t draws_ = 0;
};

} // namespace dagledger
