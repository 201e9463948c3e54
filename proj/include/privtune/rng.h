// Copyright 2026 The privtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVTUNE_RNG_H_
#define PRIVTUNE_RNG_H_

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace privtune {

inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a; used for seed derivation and config fingerprints.
inline constexpr std::uint64_t Fnv1a64(std::string_view text,
                                       std::uint64_t hash =
                                           0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Derives an independent subsystem seed ("privatize", "plain-tokens",
// "model-init", ...) from the run seed.
inline constexpr std::uint64_t DeriveSeed(std::uint64_t seed,
                                          std::string_view purpose) {
  return SplitMix64(seed ^ Fnv1a64(purpose));
}

// xoshiro256** keyed by (seed, stream, position). Every privatized token
// position gets its own generator, so results do not depend on the order in
// which positions are processed. Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) { Reseed(seed); }

  static StreamRng ForKey(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t position) {
    std::uint64_t key = SplitMix64(seed);
    key = SplitMix64(key ^ stream);
    key = SplitMix64(key ^ (position * 0xd1342543de82ef95ULL + 1));
    return StreamRng(key);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = Rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void Reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      word = SplitMix64(s);
    }
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace privtune

#endif  // PRIVTUNE_RNG_H_
