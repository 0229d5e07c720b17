#pragma once

// Reproducible per-trajectory random streams.
//
// Stream derivation (bit-exact contract):
//   key     = splitmix64(s) with s = master_seed
//   s'      = key XOR (0xD2B74407B1CE6E93 * (stream_id + 1))
//   state_i = four successive splitmix64(s') outputs (i = 0..3)
// and the generator is xoshiro256** over that state. Identical
// (master_seed, stream_id) pairs reproduce identical sequences; distinct
// stream ids give statistically independent streams.
//
// Draw pattern per variate (also part of the contract):
//   uniform      : one 64-bit output
//   exponential  : one uniform
//   poisson      : mean < 10  -> exactly one uniform (inversion by search)
//                  mean >= 10 -> two uniforms per transformed-rejection round

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace cmex {

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id) {
    std::uint64_t s = master_seed;
    const std::uint64_t key = splitmix64_next(s);
    s = key ^ (0xD2B74407B1CE6E93ULL * (stream_id + 1));
    for (auto& word : state_) word = splitmix64_next(s);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;  // xoshiro needs a nonzero state
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate; uses 1 - U to keep the log argument in (0, 1].
  double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_[4] = {};
};

/// Poisson variate. Inversion by sequential search below mean 10 (one
/// uniform per draw); Hormann's transformed rejection with squeeze (PTRS)
/// at mean >= 10 (two uniforms per round).
inline std::int64_t sample_poisson(RngStream& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson: mean must be finite and nonnegative");
  if (mean == 0.0) return 0;

  if (mean < 10.0) {
    const double u = rng.uniform();
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::int64_t k = 0;
    // P(k > 200 | mean < 10) is below 1e-100; the cap only guards rounding
    while (u > cdf && k < 200) {
      ++k;
      pmf *= mean / static_cast<double>(k);
      cdf += pmf;
    }
    return k;
  }

  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);

  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const std::int64_t k = static_cast<std::int64_t>(kf);
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + kf * log_mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return k;
  }
}

}  // namespace cmex
