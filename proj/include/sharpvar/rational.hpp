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

#ifndef SHARPVAR_RATIONAL_HPP
#define SHARPVAR_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "sharpvar/errors.hpp"

namespace sharpvar {

// Exact rational with 64-bit numerator/denominator. Probability masses in
// this library are counting ratios (j/m, or integer contrasts over n1*n0),
// so reduced terms stay far below the 64-bit range; intermediates go through
// 128-bit arithmetic. Comparisons are exact, which is what makes breakpoint
// merging in the transport integrals stable.
class Rat {
 public:
  constexpr Rat() = default;
  Rat(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw DomainError("Rat: zero denominator");
    reduce();
  }
  static Rat from_int(std::int64_t v) { return Rat(v, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;  // both reduced
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    using I128 = __int128;
    return I128(a.num_) * b.den_ < I128(b.num_) * a.den_;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

  friend Rat operator+(const Rat& a, const Rat& b) {
    using I128 = __int128;
    return make(I128(a.num_) * b.den_ + I128(b.num_) * a.den_,
                I128(a.den_) * b.den_);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    using I128 = __int128;
    return make(I128(a.num_) * b.den_ - I128(b.num_) * a.den_,
                I128(a.den_) * b.den_);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    using I128 = __int128;
    return make(I128(a.num_) * b.num_, I128(a.den_) * b.den_);
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    using I128 = __int128;
    if (b.num_ == 0) throw DomainError("Rat: division by zero");
    return make(I128(a.num_) * b.den_, I128(a.den_) * b.num_);
  }
  Rat operator-() const {
    Rat r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rat abs() const { return num_ < 0 ? -*this : *this; }

 private:
  static Rat make(__int128 num, __int128 den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 g = gcd128(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr __int128 kMax = INT64_MAX;
    if (num > kMax || num < -kMax || den > kMax)
      throw DomainError("Rat: overflow after reduction");
    Rat r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }
  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  void reduce() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_{0};
  std::int64_t den_{1};
};

}  // namespace sharpvar

#endif  // SHARPVAR_RATIONAL_HPP
