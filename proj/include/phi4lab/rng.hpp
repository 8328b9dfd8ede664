#pragma once

#include <array>
#include <cstdint>

namespace phi4lab {

// Philox4x32-10 counter-based generator. Every random number in the artifact
// is a pure function of (seed, stream, counter), so parallel workers can draw
// from disjoint counter ranges and merged results do not depend on scheduling.
struct Philox4x32 {
  static std::array<uint32_t, 4> block(uint64_t seed, uint64_t stream,
                                       uint64_t counter);
};

// Stream tags keep independent uses of the same seed from colliding.
enum class StreamTag : uint32_t {
  FieldModes = 1,
  MarkovPaths = 2,
  Bootstrap = 3,
  Pairs = 4,
  Generic = 5,
};

inline uint64_t make_stream(StreamTag tag, uint64_t sub) {
  return (static_cast<uint64_t>(tag) << 48) ^ (sub & 0xffffffffffffULL);
}

// Two independent N(0,1) draws per (seed, stream, counter) via Box-Muller.
struct NormalPair {
  double a;
  double b;
};
NormalPair normal_pair(uint64_t seed, uint64_t stream, uint64_t counter);

// Uniform double in [0,1) from one Philox block.
double uniform01(uint64_t seed, uint64_t stream, uint64_t counter);

// Uniform integer in [0, bound) without modulo bias (bound > 0).
uint64_t uniform_below(uint64_t seed, uint64_t stream, uint64_t counter,
                       uint64_t bound);

}  // namespace phi4lab
