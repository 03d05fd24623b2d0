#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rarefan {

// splitmix64 finalizer; also used as a counter-based generator
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  return splitmix64(h ^ (c * 0xa0761d6478bd642fULL));
}

// Maps 64 random bits to the open interval (0,1).
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  return unit_open(mix_key(seed, a, b, c));
}

inline std::uint64_t as_key(long v) { return static_cast<std::uint64_t>(v); }

// Stream tags keep derived seeds of different consumers apart.
enum class Stream : std::uint64_t {
  profile_left = 11,
  profile_right = 12,
  atoms_left = 13,
  atoms_right = 14,
  replica = 21,
  replica_profile = 22,
  clocks = 31,
  reservoir = 32,
  weights = 41,
  cloud = 51,
  oracle = 61,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream s, std::uint64_t index = 0) {
  return mix_key(master, static_cast<std::uint64_t>(s), index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, Stream s, std::uint64_t index = 0) {
  return Engine(derive_seed(master, s, index));
}

// Cheap-to-seed generator for short per-cell streams.
struct SplitMix {
  using result_type = std::uint64_t;
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
  }
};

template <class G>
double uniform01(G& g) {
  return unit_open(g());
}

template <class G>
double exp_draw(G& g, double rate) {
  return -std::log(uniform01(g)) / rate;
}

}  // namespace rarefan
