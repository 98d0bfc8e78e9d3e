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

#ifndef SHARPVAR_LATE_HPP
#define SHARPVAR_LATE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sharpvar/bounds.hpp"
#include "sharpvar/estimate.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/step_function.hpp"
#include "sharpvar/transport.hpp"

namespace sharpvar {

// Default thresholds: the estimated complier share below which the
// instrument is declared too weak to analyze, and the lambda magnitude below
// which a stratum's reweighted CDF is numerically meaningless.
inline constexpr double kDefaultEpsComplier = 0.01;
inline constexpr double kDefaultEpsLambda = 1e-8;

namespace detail {

inline const std::vector<std::uint8_t>& takeup(const ObservedSample& s) {
  if (!s.d) throw DomainError("noncompliance analysis requires a takeup column");
  return *s.d;
}

}  // namespace detail

// Estimated complier share: treated-arm takeup rate minus control-arm takeup
// rate, as an exact counting ratio.
inline Rat pi_c_hat_exact(const ObservedSample& s) {
  const auto& d = detail::takeup(s);
  const std::int64_t n1 = s.n_arm(1), n0 = s.n_arm(0);
  if (n1 == 0 || n0 == 0)
    throw DegenerateDesignError("pi_c_hat: an arm is empty");
  std::int64_t a = 0, b = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    (s.t[i] == 1 ? a : b) += d[i];
  return Rat(a * n0 - b * n1, n1 * n0);
}

inline double pi_c_hat(const ObservedSample& s,
                       double eps_c = kDefaultEpsComplier) {
  const double v = pi_c_hat_exact(s).to_double();
  if (v <= eps_c)
    throw WeakInstrumentError(
        "estimated complier share " + std::to_string(v) +
        " is at or below the weak-instrument threshold " + std::to_string(eps_c));
  return v;
}

// Wald estimator of the complier average effect.
inline double wald(const ObservedSample& s,
                   double eps_c = kDefaultEpsComplier) {
  return diff_in_means(s) / pi_c_hat(s, eps_c);
}

// Sample variance (divisor n_t - 1) of the adjusted outcomes
// y_i - theta_c_hat * d_i within arm t.
inline double arm_variance_adjusted(const ObservedSample& s,
                                    double theta_c_hat, int t) {
  const auto& d = detail::takeup(s);
  std::vector<double> v;
  for (std::size_t i = 0; i < s.y.size(); ++i)
    if (s.t[i] == t) v.push_back(s.y[i] - theta_c_hat * d[i]);
  if (v.size() < 2)
    throw DegenerateDesignError("arm_variance_adjusted: arm " +
                                std::to_string(t) + " has fewer than 2 units");
  const double n = static_cast<double>(v.size());
  return pop_variance(v) * n / (n - 1.0);
}

// The two per-stratum identification weights: difference in arm means of
// d * 1{w=k} (lambda_1k) and of (1-d) * 1{w=k} (lambda_0k), exact.
inline std::pair<Rat, Rat> lambda_hats(const ObservedSample& s, int k) {
  const auto& d = detail::takeup(s);
  const std::int64_t n1 = s.n_arm(1), n0 = s.n_arm(0);
  if (n1 == 0 || n0 == 0)
    throw DegenerateDesignError("lambda_hats: an arm is empty");
  std::int64_t a1 = 0, b1 = 0, a0 = 0, b0 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (s.w[i] != k) continue;
    if (s.t[i] == 1) {
      a1 += d[i];
      b0 += 1 - d[i];
    } else {
      b1 += d[i];
      a0 += 1 - d[i];
    }
  }
  return {Rat(a1 * n0 - b1 * n1, n1 * n0), Rat(a0 * n1 - b0 * n0, n0 * n1)};
}

// Estimated complier-conditional CDF of the adjusted outcome in arm t within
// stratum k: the lambda-normalized difference of arm-wise sub-ECDFs. Not
// monotone in general; its generalized inverse is still well defined, and
// its value at +infinity is exactly 1 by construction.
inline SignedStepFunction f_check(const ObservedSample& s, double theta_c_hat,
                                  int t, int k,
                                  double eps_lambda = kDefaultEpsLambda) {
  const auto& d = detail::takeup(s);
  if (t != 0 && t != 1) throw DomainError("f_check: t must be 0 or 1");
  const std::int64_t n1 = s.n_arm(1), n0 = s.n_arm(0);
  // plus part: units whose takeup matches arm t's complier behavior in their
  // own arm; minus part: the cross-arm correction
  std::vector<double> plus, minus;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    if (s.w[i] != k) continue;
    const double adj = s.y[i] - theta_c_hat * d[i];
    if (t == 1) {
      if (d[i] == 1) (s.t[i] == 1 ? plus : minus).push_back(adj);
    } else {
      if (d[i] == 0) (s.t[i] == 0 ? plus : minus).push_back(adj);
    }
  }
  const std::int64_t n_plus = t == 1 ? n1 : n0;
  const std::int64_t n_minus = t == 1 ? n0 : n1;
  const std::int64_t denom = static_cast<std::int64_t>(plus.size()) * n_minus -
                             static_cast<std::int64_t>(minus.size()) * n_plus;
  // |lambda| = |denom| / (n1 n0)
  if (std::fabs(static_cast<double>(denom)) <
      eps_lambda * static_cast<double>(n1) * static_cast<double>(n0))
    throw DegenerateDesignError(
        "stratum '" + s.stratum_labels[static_cast<std::size_t>(k)] +
        "': lambda_" + std::to_string(t) +
        " below threshold; consider merging sparse strata");
  std::sort(plus.begin(), plus.end());
  std::sort(minus.begin(), minus.end());
  std::vector<double> grid;
  grid.reserve(plus.size() + minus.size());
  std::merge(plus.begin(), plus.end(), minus.begin(), minus.end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  SignedStepFunction f;
  f.breakpoints.reserve(grid.size());
  f.values.reserve(grid.size());
  std::size_t ip = 0, im = 0;
  for (double y : grid) {
    while (ip < plus.size() && plus[ip] <= y) ++ip;
    while (im < minus.size() && minus[im] <= y) ++im;
    f.breakpoints.push_back(y);
    f.values.push_back(Rat(static_cast<std::int64_t>(ip) * n_minus -
                               static_cast<std::int64_t>(im) * n_plus,
                           denom));
  }
  return f;
}

// Plug-in sharp bounds for phi^2 of the adjusted effects: lambda_1k-weighted
// coupling integrals of the reweighted conditional CDFs, with quantiles
// taken through the monotone envelopes (identical to raw generalized
// inverses on (0,1)).
inline BoundPair late_bound_estimates(const ObservedSample& s,
                                      bool use_covariate = true,
                                      double eps_c = kDefaultEpsComplier,
                                      double eps_lambda = kDefaultEpsLambda) {
  s.validate();
  const double theta_c = wald(s, eps_c);
  ObservedSample flat;
  const ObservedSample* sp = &s;
  if (!use_covariate) {
    flat = s;
    std::fill(flat.w.begin(), flat.w.end(), 0);
    flat.stratum_labels = {"all"};
    sp = &flat;
  }
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < sp->num_strata(); ++k) {
    const Rat lambda1 = lambda_hats(*sp, k).first;
    const StepCDF f1 = monotone_envelope(f_check(*sp, theta_c, 1, k, eps_lambda));
    const StepCDF f0 = monotone_envelope(f_check(*sp, theta_c, 0, k, eps_lambda));
    const double weight = lambda1.to_double();
    lo += weight * quantile_l2_comonotone(f1, f0);
    hi += weight * quantile_l2_antimonotone(f1, f0);
  }
  return {lo, hi,
          use_covariate ? Family::kSharpLate : Family::kSharpLateNoCov,
          Level::kPlugin};
}

// Conservative variance of the Wald estimator given a lower-bound estimate
// for phi^2 of the adjusted effects; same clamping rules as the
// perfect-compliance path.
inline double sigma_c_hat2_given(const ObservedSample& s, double theta_c_hat,
                                 double pi_c, double lower_estimate) {
  const double big_n = static_cast<double>(s.population_size);
  const double n1 = static_cast<double>(s.n_arm(1));
  const double n0 = static_cast<double>(s.n_arm(0));
  const double v = (big_n / n1) * arm_variance_adjusted(s, theta_c_hat, 1) +
                   (big_n / n0) * arm_variance_adjusted(s, theta_c_hat, 0) -
                   std::max(lower_estimate, 0.0);
  return std::max(v, 0.0) / (pi_c * pi_c);
}

inline double sigma_c_hat2(const ObservedSample& s, CiFamily family,
                           double eps_c = kDefaultEpsComplier,
                           double eps_lambda = kDefaultEpsLambda) {
  const double pi_c = pi_c_hat(s, eps_c);
  const double theta_c = diff_in_means(s) / pi_c;
  double lower = 0.0;
  switch (family) {
    case CiFamily::kNaiveZero:
      lower = 0.0;
      break;
    case CiFamily::kSharpLateNoCov:
      lower = late_bound_estimates(s, false, eps_c, eps_lambda).lower;
      break;
    case CiFamily::kSharpLate:
      lower = late_bound_estimates(s, true, eps_c, eps_lambda).lower;
      break;
    default:
      throw DomainError("sigma_c_hat2: family not applicable to noncompliance");
  }
  return sigma_c_hat2_given(s, theta_c, pi_c, lower);
}

inline Interval ci_late(const ObservedSample& s, double alpha, CiFamily family,
                        double eps_c = kDefaultEpsComplier,
                        double eps_lambda = kDefaultEpsLambda) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("ci_late: alpha outside (0,1)");
  return interval_around(wald(s, eps_c), sigma_c_hat2(s, family, eps_c, eps_lambda),
                         alpha, static_cast<double>(s.population_size));
}

struct LateCiResult {
  double lower_bound_raw{0};
  double lower_bound_used{0};
  double sigma_c_hat2{0};
  Interval ci;
  double p_value_less{0};  // one-sided p for H1: theta_c < 0
};

struct LateAnalysis {
  double theta_c_hat{0};
  double pi_c_hat{0};
  double phi2_check_1{0};
  double phi2_check_0{0};
  double alpha{0};
  std::map<int, std::pair<Rat, Rat>> lambda;  // per canonical stratum
  std::map<Family, BoundPair> bounds;
  std::map<CiFamily, LateCiResult> ci;
};

inline LateAnalysis analyze_late(const ObservedSample& s, double alpha,
                                 const std::vector<CiFamily>& families,
                                 double eps_c = kDefaultEpsComplier,
                                 double eps_lambda = kDefaultEpsLambda) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("analyze_late: alpha outside (0,1)");
  LateAnalysis a;
  a.alpha = alpha;
  a.pi_c_hat = pi_c_hat(s, eps_c);
  a.theta_c_hat = diff_in_means(s) / a.pi_c_hat;
  a.phi2_check_1 = arm_variance_adjusted(s, a.theta_c_hat, 1);
  a.phi2_check_0 = arm_variance_adjusted(s, a.theta_c_hat, 0);
  for (int k = 0; k < s.num_strata(); ++k) a.lambda[k] = lambda_hats(s, k);
  a.bounds[Family::kSharpLate] = late_bound_estimates(s, true, eps_c, eps_lambda);
  a.bounds[Family::kSharpLateNoCov] =
      late_bound_estimates(s, false, eps_c, eps_lambda);
  const double big_n = static_cast<double>(s.population_size);
  for (CiFamily f : families) {
    LateCiResult r;
    switch (f) {
      case CiFamily::kNaiveZero:
        r.lower_bound_raw = 0.0;
        break;
      case CiFamily::kSharpLateNoCov:
        r.lower_bound_raw = a.bounds[Family::kSharpLateNoCov].lower;
        break;
      case CiFamily::kSharpLate:
        r.lower_bound_raw = a.bounds[Family::kSharpLate].lower;
        break;
      default:
        throw DomainError("analyze_late: perfect-compliance family requested");
    }
    r.lower_bound_used = std::max(r.lower_bound_raw, 0.0);
    r.sigma_c_hat2 =
        sigma_c_hat2_given(s, a.theta_c_hat, a.pi_c_hat, r.lower_bound_raw);
    r.ci = interval_around(a.theta_c_hat, r.sigma_c_hat2, alpha, big_n);
    r.p_value_less = r.sigma_c_hat2 > 0.0
                         ? normal_cdf(std::sqrt(big_n) * a.theta_c_hat /
                                      std::sqrt(r.sigma_c_hat2))
                         : (a.theta_c_hat < 0.0 ? 0.0 : 1.0);
    a.ci[f] = r;
  }
  return a;
}

}  // namespace sharpvar

#endif  // SHARPVAR_LATE_HPP
