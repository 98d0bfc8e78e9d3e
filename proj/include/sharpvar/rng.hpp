//
// Copyright 2026 The sharpvar Authors
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
//

#ifndef SHARPVAR_RNG_HPP
#define SHARPVAR_RNG_HPP

#include <cstdint>

#include "sharpvar/errors.hpp"
#include "sharpvar/normal.hpp"

namespace sharpvar {

// SplitMix64 generator. Every stochastic result in this library is a pure
// function of a 64-bit seed through this generator, so runs reproduce byte
// for byte. stream(i) derives an independent child generator from the
// original seed and the stream index only; it does not consume or depend on
// the parent's position, so replications may run in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += kGamma);
    return mix(z);
  }

  // Uniform on the open interval (0,1): (i + 0.5) / 2^53 with i in [0, 2^53).
  double next_unit() {
    const std::uint64_t i = next_u64() >> 11;
    return (static_cast<double>(i) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased via rejection on the 128-bit
  // multiply-shift reduction.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::bounded: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) *
                          static_cast<unsigned __int128>(n);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) *
            static_cast<unsigned __int128>(n);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Normal variate by the inverse-CDF transform: one uniform per variate.
  double normal(double mean, double sd) {
    return mean + sd * normal_quantile(next_unit());
  }

  // Child generator for stream `index`, derived from the original seed.
  Rng stream(std::uint64_t index) const {
    return Rng(mix(seed_ ^ mix(index + kGamma)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace sharpvar

#endif  // SHARPVAR_RNG_HPP
