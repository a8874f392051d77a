#pragma once

#include <cstdint>
#include <initializer_list>

#include "aggcorr/lattice.hpp"

namespace aggcorr {

// Stream splitting rule used everywhere a child stream is needed:
//   child = mix(parent ^ mix(key_1 + c), ...) folded left over the keys,
// with mix the splitmix64 finaliser. Children depend only on (parent, keys),
// never on how work is scheduled.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t split_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix64(parent);
  for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace aggcorr
