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

#ifndef SHARPVAR_STEP_FUNCTION_HPP
#define SHARPVAR_STEP_FUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sharpvar/errors.hpp"
#include "sharpvar/rational.hpp"

namespace sharpvar {

// Right-continuous step distribution function on the real line: value 0 left
// of the first support point, cum[j] on [support[j], support[j+1]), and 1
// from the last support point on. Masses are exact rationals so that merging
// the quantile grids of two CDFs never suffers float-comparison ties.
class StepCDF {
 public:
  StepCDF() = default;

  // Empirical CDF of a multiset of values; mass j/m at the j-th distinct
  // sorted value.
  static StepCDF empirical(std::vector<double> values) {
    if (values.empty()) throw DomainError("StepCDF: empty sample");
    std::sort(values.begin(), values.end());
    StepCDF f;
    const auto m = static_cast<std::int64_t>(values.size());
    std::int64_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      ++count;
      if (i + 1 == values.size() || values[i + 1] != values[i]) {
        f.support_.push_back(values[i]);
        f.cum_.push_back(Rat(count, m));
      }
    }
    return f;
  }

  // From explicit steps. Cumulative masses must be nondecreasing; flat steps
  // are dropped (they carry no mass and do not change evaluation). A total
  // mass within 1e-9 of one is renormalized; a larger deficit is rejected.
  static StepCDF from_steps(std::vector<double> support, std::vector<Rat> cum) {
    if (support.empty() || support.size() != cum.size())
      throw DomainError("StepCDF: bad step arrays");
    const Rat one(1, 1);
    Rat total = cum.back();
    if (total != one) {
      if (std::fabs(total.to_double() - 1.0) > 1e-9)
        throw DomainError("StepCDF: total mass differs from 1 beyond 1e-9");
      for (auto& c : cum) c = c / total;
    }
    StepCDF f;
    Rat prev(0, 1);
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i > 0 && !(support[i] > support[i - 1]))
        throw DomainError("StepCDF: support not strictly increasing");
      if (cum[i] < prev) throw DomainError("StepCDF: masses decrease");
      if (cum[i] > prev) {
        f.support_.push_back(support[i]);
        f.cum_.push_back(cum[i]);
        prev = cum[i];
      }
    }
    return f;
  }

  std::span<const double> support() const { return support_; }
  std::span<const Rat> cum() const { return cum_; }
  std::size_t size() const { return support_.size(); }

  double value(double y) const {
    auto it = std::upper_bound(support_.begin(), support_.end(), y);
    if (it == support_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - support_.begin()) - 1].to_double();
  }

  // Generalized inverse at u in (0,1]: the smallest support point where the
  // cumulative mass first reaches u.
  double quantile(double u) const {
    if (!(u > 0.0 && u <= 1.0))
      throw DomainError("StepCDF::quantile: u outside (0,1]");
    auto it = std::partition_point(cum_.begin(), cum_.end(),
                                   [&](const Rat& c) { return c.to_double() < u; });
    if (it == cum_.end()) return std::numeric_limits<double>::infinity();
    return support_[static_cast<std::size_t>(it - cum_.begin())];
  }

  // Shift the whole support by c (distribution of X + c).
  StepCDF shifted(double c) const {
    StepCDF f = *this;
    for (auto& s : f.support_) s += c;
    return f;
  }

 private:
  std::vector<double> support_;
  std::vector<Rat> cum_;
};

// A right-continuous piecewise-constant function with limit 0 at -infinity
// and limit 1 at +infinity that need not be monotone (weighted differences
// of sub-ECDFs dip and overshoot). Values are exact rationals.
struct SignedStepFunction {
  std::vector<double> breakpoints;  // strictly increasing
  std::vector<Rat> values;          // value on [breakpoints[j], breakpoints[j+1])

  double value(double y) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), y);
    if (it == breakpoints.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1]
        .to_double();
  }

  // First crossing of level u, scanning the raw definition; +infinity if the
  // level is never reached. Dips below earlier crossings are irrelevant.
  double quantile(double u) const {
    if (!(u > 0.0 && u <= 1.0))
      throw DomainError("SignedStepFunction::quantile: u outside (0,1]");
    for (std::size_t j = 0; j < values.size(); ++j)
      if (values[j].to_double() >= u) return breakpoints[j];
    return std::numeric_limits<double>::infinity();
  }
};

inline double generalized_inverse(const StepCDF& f, double u) {
  return f.quantile(u);
}
inline double generalized_inverse(const SignedStepFunction& f, double u) {
  return f.quantile(u);
}

// Running supremum of a signed step function, clamped to [0,1]. For an input
// with limit 1 this is a proper distribution function, and it shares the
// generalized inverse of the raw function everywhere on (0,1).
inline StepCDF monotone_envelope(const SignedStepFunction& f) {
  if (f.values.empty() || f.values.back() != Rat(1, 1))
    throw DomainError("monotone_envelope: function must end at 1");
  std::vector<Rat> cum;
  cum.reserve(f.values.size());
  Rat run(0, 1);
  const Rat one(1, 1);
  for (const Rat& v : f.values) {
    if (v > run) run = v;
    cum.push_back(run > one ? one : run);
  }
  return StepCDF::from_steps(f.breakpoints, std::move(cum));
}

// Quantile function H^{-1} on (0,1] as explicit pieces: value[j] on
// (cum[j-1], cum[j]], with cum strictly increasing up to 1. This is the
// common currency of the coupling integrals.
struct StepQuantile {
  std::vector<Rat> cum;
  std::vector<double> value;

  static StepQuantile forward(const StepCDF& f) {
    StepQuantile q;
    q.cum.assign(f.cum().begin(), f.cum().end());
    q.value.assign(f.support().begin(), f.support().end());
    return q;
  }

  // The map u -> F^{-1}(1-u) as quantile pieces. Piece j covers
  // (1 - cum[m-1-j], 1 - cum[m-2-j]] with value support[m-1-j]; the endpoint
  // u = 1 (where the raw definition gives -infinity) has measure zero and is
  // absorbed into the last piece.
  static StepQuantile reversed(const StepCDF& f) {
    StepQuantile q;
    const auto m = f.size();
    q.cum.reserve(m);
    q.value.reserve(m);
    const Rat one(1, 1);
    for (std::size_t j = 0; j < m; ++j) {
      q.value.push_back(f.support()[m - 1 - j]);
      q.cum.push_back(j + 1 == m ? one : one - f.cum()[m - 2 - j]);
    }
    return q;
  }

  double at(double u) const {
    if (!(u > 0.0 && u <= 1.0))
      throw DomainError("StepQuantile::at: u outside (0,1]");
    for (std::size_t j = 0; j < cum.size(); ++j)
      if (cum[j].to_double() >= u) return value[j];
    return std::numeric_limits<double>::infinity();
  }
};

}  // namespace sharpvar

#endif  // SHARPVAR_STEP_FUNCTION_HPP
