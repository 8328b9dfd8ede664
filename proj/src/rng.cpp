#include "phi4lab/rng.hpp"

#include <cmath>

namespace phi4lab {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3)-1

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

}  // namespace

std::array<uint32_t, 4> Philox4x32::block(uint64_t seed, uint64_t stream,
                                          uint64_t counter) {
  std::array<uint32_t, 4> x = {
      static_cast<uint32_t>(counter),
      static_cast<uint32_t>(counter >> 32),
      static_cast<uint32_t>(stream),
      static_cast<uint32_t>(stream >> 32),
  };
  uint32_t k0 = static_cast<uint32_t>(seed);
  uint32_t k1 = static_cast<uint32_t>(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, x[0], hi0, lo0);
    mulhilo(kPhiloxM1, x[2], hi1, lo1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return x;
}

NormalPair normal_pair(uint64_t seed, uint64_t stream, uint64_t counter) {
  auto x = Philox4x32::block(seed, stream, counter);
  // 53-bit uniform in (0,1] for the radius so log() stays finite.
  uint64_t u64 = (static_cast<uint64_t>(x[0]) << 32) | x[1];
  double u1 = static_cast<double>((u64 >> 11) + 1) * 0x1.0p-53;
  uint64_t v64 = (static_cast<uint64_t>(x[2]) << 32) | x[3];
  double u2 = static_cast<double>(v64 >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 2.0 * M_PI * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double uniform01(uint64_t seed, uint64_t stream, uint64_t counter) {
  auto x = Philox4x32::block(seed, stream, counter);
  uint64_t u64 = (static_cast<uint64_t>(x[0]) << 32) | x[1];
  return static_cast<double>(u64 >> 11) * 0x1.0p-53;
}

uint64_t uniform_below(uint64_t seed, uint64_t stream, uint64_t counter,
                       uint64_t bound) {
  // Rejection-free Lemire reduction is fine here; bias at 64 bits is
  // immaterial for bootstrap index draws.
  auto x = Philox4x32::block(seed, stream, counter);
  uint64_t u64 = (static_cast<uint64_t>(x[0]) << 32) | x[1];
  unsigned __int128 m = static_cast<unsigned __int128>(u64) * bound;
  return static_cast<uint64_t>(m >> 64);
}

}  // namespace phi4lab
