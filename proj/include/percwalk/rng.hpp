// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace percwalk {

// Counter-based generator (Philox 4x32-10, Salmon et al. 2011). Each draw is a
// pure function of (key, counter), so per-edge and per-trial variates are
// reproducible regardless of evaluation order or thread count.
namespace philox {

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
  uint64_t p = uint64_t(a) * uint64_t(b);
  lo = uint32_t(p);
  hi = uint32_t(p >> 32);
}

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                     std::array<uint32_t, 2> key) {
  constexpr uint32_t kWeylA = 0x9E3779B9u, kWeylB = 0xBB67AE85u;
  constexpr uint32_t kMulA = 0xD2511F53u, kMulB = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

}  // namespace philox

inline uint64_t philox_u64(uint64_t seed, uint64_t stream, uint64_t index) {
  auto out = philox::block({uint32_t(index), uint32_t(index >> 32),
                            uint32_t(stream), uint32_t(stream >> 32)},
                           {uint32_t(seed), uint32_t(seed >> 32)});
  return (uint64_t(out[1]) << 32) | out[0];
}

// Uniform in [0,1) from the top 53 bits; u < p gives the per-edge coupling:
// with a shared (seed, index) the open set is monotone in p.
inline double philox_uniform(uint64_t seed, uint64_t stream, uint64_t index) {
  return double(philox_u64(seed, stream, index) >> 11) * 0x1.0p-53;
}

// splitmix64 step, used to derive independent sub-seeds from a master seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> tags) {
  uint64_t s = splitmix64(master);
  for (uint64_t t : tags) s = splitmix64(s ^ t);
  return s;
}

// Sequential stream over a philox keyed counter; used for walk trajectories.
struct CounterRng {
  uint64_t seed = 0;
  uint64_t stream = 0;
  uint64_t counter = 0;

  explicit CounterRng(uint64_t seed_, uint64_t stream_ = 0)
      : seed(seed_), stream(stream_) {}

  uint64_t next_u64() { return philox_u64(seed, stream, counter++); }

  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // exponential(1); uses 1-u so the argument of log is in (0,1]
  double next_exponential() { return -std::log1p(-next_uniform()); }

  // unbiased integer in [0, n) by rejection
  uint32_t next_below(uint32_t n) {
    uint64_t bound = (~uint64_t(0) / n) * n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= bound);
    return uint32_t(v % n);
  }
};

}  // namespace percwalk
