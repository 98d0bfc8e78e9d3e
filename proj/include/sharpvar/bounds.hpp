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

#ifndef SHARPVAR_BOUNDS_HPP
#define SHARPVAR_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sharpvar/errors.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/transport.hpp"

namespace sharpvar {

// Variance-bound families. "sharp" exploits the within-stratum conditional
// outcome distributions; "aronow" only the marginals (the K=1 special case);
// "ding" is the regression-based bound. The late variants bound the
// adjusted-effect variance in the noncompliance pipeline.
enum class Family { kSharp, kAronow, kDing, kSharpLate, kSharpLateNoCov };

enum class Level { kPopulation, kPlugin };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::kSharp:
      return "sharp";
    case Family::kAronow:
      return "aronow";
    case Family::kDing:
      return "ding";
    case Family::kSharpLate:
      return "sharp-late";
    case Family::kSharpLateNoCov:
      return "sharp-late-nocov";
  }
  return "?";
}

struct BoundPair {
  double lower{0};
  double upper{0};
  Family family{Family::kSharp};
  Level level{Level::kPopulation};
};

// Lower-bound choices when assembling a conservative variance estimate.
enum class CiFamily {
  kNaiveZero,
  kAronow,
  kDing,
  kSharp,
  kSharpLateNoCov,
  kSharpLate,
};

inline std::string ci_family_name(CiFamily f) {
  switch (f) {
    case CiFamily::kNaiveZero:
      return "naive-zero";
    case CiFamily::kAronow:
      return "aronow";
    case CiFamily::kDing:
      return "ding";
    case CiFamily::kSharp:
      return "sharp";
    case CiFamily::kSharpLateNoCov:
      return "sharp-late-nocov";
    case CiFamily::kSharpLate:
      return "sharp-late";
  }
  return "?";
}

// Sharp bounds on the variance of unit effects, using the stratum partition:
// sum_k pi_k * coupling(F_{1|k}, F_{0|k}) - theta^2, with the comonotone
// coupling below and the antimonotone coupling above.
inline BoundPair sharp_bounds_cov(const FinitePopulation& pop) {
  pop.validate();
  const StratumTable tab = stratum_table(pop);
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < tab.num_strata(); ++k) {
    const StepCDF f1 = conditional_cdf(pop, 1, k);
    const StepCDF f0 = conditional_cdf(pop, 0, k);
    const double pi = tab.pi[static_cast<std::size_t>(k)].to_double();
    lo += pi * quantile_l2_comonotone(f1, f0);
    hi += pi * quantile_l2_antimonotone(f1, f0);
  }
  const double theta = ate(pop);
  return {lo - theta * theta, hi - theta * theta, Family::kSharp,
          Level::kPopulation};
}

// Marginal-distribution bounds (no covariate information).
inline BoundPair aronow_bounds(const FinitePopulation& pop) {
  pop.validate();
  const StepCDF f1 = StepCDF::empirical(pop.y1);
  const StepCDF f0 = StepCDF::empirical(pop.y0);
  const double lo = 1.0 * quantile_l2_comonotone(f1, f0);
  const double hi = 1.0 * quantile_l2_antimonotone(f1, f0);
  const double theta = ate(pop);
  return {lo - theta * theta, hi - theta * theta, Family::kAronow,
          Level::kPopulation};
}

namespace detail {

// Solve the K x K system a * x = b by Gaussian elimination with partial
// pivoting. Pivots below `tol` raise RegressionError.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b,
                                        double tol = 1e-10) {
  const std::size_t k = a.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < tol)
      throw RegressionError("design matrix is rank deficient");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(k, 0.0);
  for (std::size_t r = k; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < k; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

// Least squares of y on [intercept, stratum dummies 1..K-1] restricted to
// `rows`. Returns the K coefficients. Normal equations are assembled from
// stratum counts directly.
inline std::vector<double> dummy_least_squares(
    const std::vector<double>& y, const std::vector<int>& w, int num_strata,
    const std::vector<std::size_t>& rows) {
  const std::size_t k = static_cast<std::size_t>(num_strata);
  std::vector<double> count(k, 0.0), ysum(k, 0.0);
  for (std::size_t i : rows) {
    count[static_cast<std::size_t>(w[i])] += 1.0;
    ysum[static_cast<std::size_t>(w[i])] += y[i];
  }
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  double total = 0.0, ytotal = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    total += count[j];
    ytotal += ysum[j];
  }
  xtx[0][0] = total;
  xty[0] = ytotal;
  for (std::size_t j = 1; j < k; ++j) {
    xtx[0][j] = xtx[j][0] = count[j];
    xtx[j][j] = count[j];
    xty[j] = ysum[j];
  }
  return solve_linear(std::move(xtx), std::move(xty));
}

inline double fitted_value(const std::vector<double>& gamma, int stratum) {
  return gamma[0] + (stratum > 0 ? gamma[static_cast<std::size_t>(stratum)] : 0.0);
}

}  // namespace detail

// Per-arm least squares of the potential outcomes on the stratum design:
// coefficients, residual sequences and the fitted contrast per unit.
struct RegressionFit {
  std::vector<double> gamma1;
  std::vector<double> gamma0;
  std::vector<double> e1;     // residuals of y1
  std::vector<double> e0;     // residuals of y0
  std::vector<double> tau_w;  // fitted contrast per unit
};

inline RegressionFit fit_stratum_regression(const FinitePopulation& pop) {
  pop.validate();
  std::vector<std::size_t> all(pop.y1.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  RegressionFit fit;
  fit.gamma1 = detail::dummy_least_squares(pop.y1, pop.w, pop.num_strata(), all);
  fit.gamma0 = detail::dummy_least_squares(pop.y0, pop.w, pop.num_strata(), all);
  fit.e1.resize(all.size());
  fit.e0.resize(all.size());
  fit.tau_w.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double f1 = detail::fitted_value(fit.gamma1, pop.w[i]);
    const double f0 = detail::fitted_value(fit.gamma0, pop.w[i]);
    fit.e1[i] = pop.y1[i] - f1;
    fit.e0[i] = pop.y0[i] - f0;
    fit.tau_w[i] = f1 - f0;
  }
  return fit;
}

// Regression-based bounds: phi^2(tau_w) plus the coupling integrals of the
// residual distributions. Tighter than the marginal bounds in some regimes
// and looser in others; never tighter than the sharp bounds.
inline BoundPair ding_bounds(const FinitePopulation& pop) {
  const RegressionFit fit = fit_stratum_regression(pop);
  const double base = pop_variance(fit.tau_w);
  const StepCDF fe1 = StepCDF::empirical(fit.e1);
  const StepCDF fe0 = StepCDF::empirical(fit.e0);
  return {base + quantile_l2_comonotone(fe1, fe0),
          base + quantile_l2_antimonotone(fe1, fe0), Family::kDing,
          Level::kPopulation};
}

namespace detail {

// Check instrument assumptions on a labeled population: no defiers, and no
// outcome contrast for units whose uptake cannot change.
inline void check_late_assumptions(const FinitePopulation& pop) {
  if (!pop.compliance)
    throw DomainError("late bounds: population has no compliance types");
  bool any_complier = false;
  for (std::size_t i = 0; i < pop.y1.size(); ++i) {
    const Compliance g = (*pop.compliance)[i];
    if (g == Compliance::kDefier)
      throw AssumptionViolationError("monotonicity violated: unit " +
                                     std::to_string(i) + " is a defier");
    if (g == Compliance::kComplier) {
      any_complier = true;
    } else if (pop.y1[i] != pop.y0[i]) {
      throw AssumptionViolationError(
          "exclusion restriction violated at unit " + std::to_string(i));
    }
  }
  if (!any_complier)
    throw WeakInstrumentError("late bounds: population has no compliers");
}

}  // namespace detail

// Sharp bounds on phi^2 of the adjusted effects tilde-tau, from the
// complier-conditional distributions of y_t - theta_c * d_t. The adjusted
// effects have zero mean, so there is no squared-mean subtraction.
inline BoundPair sharp_bounds_late(const FinitePopulation& pop,
                                   bool use_covariate = true) {
  pop.validate();
  detail::check_late_assumptions(pop);
  const double theta_c = late_truth(pop);
  const auto n = pop.y1.size();
  // complier adjusted outcomes per stratum (single stratum when the
  // covariate is ignored)
  const std::size_t nk = use_covariate ? static_cast<std::size_t>(pop.num_strata()) : 1;
  std::vector<std::vector<double>> ct1(nk), ct0(nk);
  for (std::size_t i = 0; i < n; ++i) {
    if ((*pop.compliance)[i] != Compliance::kComplier) continue;
    const std::size_t k = use_covariate ? static_cast<std::size_t>(pop.w[i]) : 0;
    ct1[k].push_back(pop.y1[i] - theta_c);  // complier: d1 = 1
    ct0[k].push_back(pop.y0[i]);            // complier: d0 = 0
  }
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    if (ct1[k].empty()) continue;  // no compliers in this stratum: zero weight
    const double weight =
        static_cast<double>(ct1[k].size()) / static_cast<double>(n);
    const StepCDF f1 = StepCDF::empirical(ct1[k]);
    const StepCDF f0 = StepCDF::empirical(ct0[k]);
    lo += weight * quantile_l2_comonotone(f1, f0);
    hi += weight * quantile_l2_antimonotone(f1, f0);
  }
  return {lo, hi,
          use_covariate ? Family::kSharpLate : Family::kSharpLateNoCov,
          Level::kPopulation};
}

// The population attaining a sharp bound: within each stratum, pair sorted
// treated outcomes with sorted (lower) or reverse-sorted (upper) control
// outcomes. Stratum shares and both conditional outcome distributions are
// preserved exactly.
enum class ExtremalSide { kLower, kUpper };

inline FinitePopulation extremal_population(const FinitePopulation& pop,
                                            ExtremalSide which) {
  pop.validate();
  if (pop.compliance)
    throw DomainError(
        "extremal_population: perfect-compliance construction only");
  FinitePopulation out = pop;
  const StratumTable tab = stratum_table(pop);
  for (const auto& members : tab.members) {
    std::vector<double> a, b;
    a.reserve(members.size());
    b.reserve(members.size());
    for (std::size_t i : members) {
      a.push_back(pop.y1[i]);
      b.push_back(pop.y0[i]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (which == ExtremalSide::kUpper) std::reverse(b.begin(), b.end());
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.y1[members[j]] = a[j];
      out.y0[members[j]] = b[j];
    }
  }
  return out;
}

// The 600-unit two-stratum binary benchmark population: P(w=1)=1/3,
// P(y0=1|w=1)=3/4, P(y0=1|w=0)=1/8, and a treated response P(y1=1|w=1)=j/200
// swept over a 200-point grid (P(y1=1|w=0)=1-j/400 keeps the marginal at
// 2/3). Exercises the orderings of the bound families; the within-stratum
// joint pairs sorted outcomes, which only pins phi^2(tau), not any bound.
inline FinitePopulation binary_comparison_population(int j) {
  if (j < 1 || j > 200)
    throw DomainError("binary_comparison_population: grid index in 1..200");
  std::vector<double> y1, y0;
  std::vector<std::string> w;
  auto fill = [&](const std::string& key, int count, int ones1, int ones0) {
    for (int i = 0; i < count; ++i) {
      y1.push_back(i < count - ones1 ? 0.0 : 1.0);
      y0.push_back(i < count - ones0 ? 0.0 : 1.0);
      w.push_back(key);
    }
  };
  fill("1", 200, j, 150);
  fill("0", 400, 400 - j, 50);
  return make_population(std::move(y1), std::move(y0), w);
}

// Enumeration oracle: min and max of (1/m) sum (a_i - b_perm(i))^2 over all
// pairings of two equal-size multisets. Only for tiny inputs.
inline std::pair<double, double> brute_force_extremes(std::vector<double> a,
                                                      std::vector<double> b) {
  if (a.size() != b.size())
    throw DomainError("brute_force_extremes: size mismatch");
  if (a.empty() || a.size() > 8)
    throw DomainError("brute_force_extremes: size must be in 1..8");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double inv_m = 1.0 / static_cast<double>(a.size());
  double lo = 0.0, hi = 0.0;
  bool first = true;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      cost += inv_m * (d * d);
    }
    if (first || cost < lo) lo = cost;
    if (first || cost > hi) hi = cost;
    first = false;
  } while (std::next_permutation(b.begin(), b.end()));
  return {lo, hi};
}

}  // namespace sharpvar

#endif  // SHARPVAR_BOUNDS_HPP
