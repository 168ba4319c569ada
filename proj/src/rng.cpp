#include "dagledger/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dagledger {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &lo,
                    std::uint32_t &hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

inline PhiloxKey split_key(std::uint64_t k) {
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

} // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, ctr[0], lo0, hi0);
    mulhilo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t philox_hash(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(a),
                          static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(b >> 32)};
  const PhiloxCounter out = philox4x32_10(ctr, split_key(key));
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                std::uint64_t point_hash,
                                std::uint64_t trial_index) {
  return philox_hash(master_seed, point_hash, trial_index);
}

SimRng::SimRng(std::uint64_t seed) : key_(split_key(seed)) {}

void SimRng::refill() {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32), 0u, 0u};
  buffer_ = philox4x32_10(ctr, key_);
  ++block_;
  used_ = 0;
}

std::uint32_t SimRng::next_u32() {
  if (used_ == 4) refill();
  ++draws_;
  return buffer_[used_++];
}

std::uint64_t SimRng::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double SimRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

namespace {
__extension__ using u128 = unsigned __int128;
} // namespace

std::uint64_t SimRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
  // Lemire's multiply-shift with rejection; unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    const u128 m = static_cast<u128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold)
      return static_cast<std::uint64_t>(m >> 64);
  }
}

bool SimRng::bernoulli(double p) { return uniform01() < p; }

std::uint32_t SimRng::poisson(double mean) {
  if (!(mean >= 0.0) || mean > 700.0)
    throw std::invalid_argument("poisson: mean must be in [0, 700]");
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double product = uniform01();
  while (product > limit) {
    ++k;
    product *= uniform01();
  }
  return k;
}

} // namespace dagledger
