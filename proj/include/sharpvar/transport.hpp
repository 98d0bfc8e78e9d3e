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

#ifndef SHARPVAR_TRANSPORT_HPP
#define SHARPVAR_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "sharpvar/errors.hpp"
#include "sharpvar/step_function.hpp"

namespace sharpvar {

// Exact integral of (f(u) - g(u))^2 over (0,1) for two step quantile
// functions: merge the piece boundaries of both and sum (du) * diff^2 over
// the merged pieces. The boundary merge compares exact rationals, so equal
// masses (the j/m grids of equal-size samples) always coincide and each
// merged piece multiplies one squared difference by one exact du.
inline double quantile_l2(const StepQuantile& f, const StepQuantile& g) {
  if (f.cum.empty() || g.cum.empty())
    throw DomainError("quantile_l2: empty quantile function");
  if (f.cum.back() != Rat(1, 1) || g.cum.back() != Rat(1, 1))
    throw DomainError("quantile_l2: total mass deficit");
  double total = 0.0;
  Rat prev(0, 1);
  std::size_t i = 0, j = 0;
  while (i < f.cum.size() && j < g.cum.size()) {
    const Rat& cf = f.cum[i];
    const Rat& cg = g.cum[j];
    const Rat u = cf < cg ? cf : cg;
    const double du = (u - prev).to_double();
    const double d = f.value[i] - g.value[j];
    total += du * (d * d);
    if (cf <= u) ++i;
    if (cg <= u) ++j;
    prev = u;
  }
  return total;
}

// Squared L2 distance between the quantile functions of F and G (the
// comonotone coupling of the squared-difference integral).
inline double quantile_l2_comonotone(const StepCDF& f, const StepCDF& g) {
  return quantile_l2(StepQuantile::forward(f), StepQuantile::forward(g));
}

// Same integral with G's quantile evaluated at 1-u (antimonotone coupling).
inline double quantile_l2_antimonotone(const StepCDF& f, const StepCDF& g) {
  return quantile_l2(StepQuantile::forward(f), StepQuantile::reversed(g));
}

// The comonotone integral computed by the double-integral identity
//   2 * iint_{v<=w} [(F(v)-G(w))_+ + (G(v)-F(w))_+] dv dw,
// evaluated as an exact sum over the rectangle grid of merged support points
// (the integrand is constant on each cell, and vanishes left of the merged
// support and right of it). An independent algebraic route used to
// cross-check quantile_l2_comonotone.
inline double representation_check(const StepCDF& f, const StepCDF& g) {
  std::vector<double> grid;
  grid.reserve(f.size() + g.size());
  grid.insert(grid.end(), f.support().begin(), f.support().end());
  grid.insert(grid.end(), g.support().begin(), g.support().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t r = grid.size();
  if (r < 2) return 0.0;  // identical point masses

  std::vector<double> fv(r), gv(r);
  for (std::size_t a = 0; a < r; ++a) {
    fv[a] = f.value(grid[a]);
    gv[a] = g.value(grid[a]);
  }
  auto pos = [](double x) { return x > 0.0 ? x : 0.0; };
  double total = 0.0;
  for (std::size_t a = 0; a + 1 < r; ++a) {
    const double dv = grid[a + 1] - grid[a];
    // diagonal cell: the triangle {v <= w} is half the square
    total += dv * dv * (pos(fv[a] - gv[a]) + pos(gv[a] - fv[a]));
    for (std::size_t b = a + 1; b + 1 < r; ++b) {
      const double dw = grid[b + 1] - grid[b];
      total += 2.0 * dv * dw * (pos(fv[a] - gv[b]) + pos(gv[a] - fv[b]));
    }
  }
  return total;
}

}  // namespace sharpvar

#endif  // SHARPVAR_TRANSPORT_HPP
