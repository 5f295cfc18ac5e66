// xvalign/rng.h

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVALIGN_RNG_H_
#define XVALIGN_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace xvalign {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a; stable across platforms, used for names and config hashes.
constexpr std::uint64_t Fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the named substream of `parent`.
constexpr std::uint64_t SubSeed(std::uint64_t parent, std::string_view name) {
  return Mix64(parent ^ Fnv1a(name));
}

/// Seed of the indexed substream of `parent`.
constexpr std::uint64_t SubSeed(std::uint64_t parent, std::uint64_t index) {
  return Mix64(Mix64(parent) + index);
}

inline double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace xvalign

#endif  // XVALIGN_RNG_H_
