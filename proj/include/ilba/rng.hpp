// Copyright 2026 The ilba-cpp Authors
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

#ifndef ILBA_RNG_HPP_
#define ILBA_RNG_HPP_

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace ilba {

// Seedable, splittable random source. Every draw path is fully specified
// (std::mt19937_64 plus rejection sampling), so a seed reproduces the same
// stream on any platform. One table build owns one source exclusively and
// consumes draws in canonical row order.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(SplitMix64(seed)) {}

  std::uint64_t Next() { return engine_(); }

  // Unbiased uniform draw in [0, n) via rejection sampling.
  std::uint64_t UniformBelow(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("UniformBelow: n must be >= 1");
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    // 2^64 mod n, computed without 128-bit arithmetic.
    const std::uint64_t overflow = (kMax % n + 1) % n;
    const std::uint64_t limit = kMax - overflow;  // inclusive accept bound
    for (;;) {
      const std::uint64_t v = engine_();
      if (v <= limit) return v % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double UniformUnit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Derives an independent child stream; advances this stream by one draw.
  SplitRng Split() { return SplitRng(Next()); }

 private:
  static std::uint64_t SplitMix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace ilba

#endif  // ILBA_RNG_HPP_
