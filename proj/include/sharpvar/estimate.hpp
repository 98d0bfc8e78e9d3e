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

#ifndef SHARPVAR_ESTIMATE_HPP
#define SHARPVAR_ESTIMATE_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sharpvar/bounds.hpp"
#include "sharpvar/normal.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/transport.hpp"

namespace sharpvar {

namespace detail {

inline std::vector<double> arm_values(const ObservedSample& s, int t) {
  std::vector<double> v;
  for (std::size_t i = 0; i < s.y.size(); ++i)
    if (s.t[i] == t) v.push_back(s.y[i]);
  return v;
}

}  // namespace detail

// Difference-in-means estimator of the average treatment effect.
inline double diff_in_means(const ObservedSample& s) {
  const auto treated = detail::arm_values(s, 1);
  const auto control = detail::arm_values(s, 0);
  if (treated.empty() || control.empty())
    throw DegenerateDesignError("diff_in_means: an arm is empty");
  return mean(treated) - mean(control);
}

// Sample variance (divisor n_t - 1) of the observed outcomes in arm t.
inline double arm_variance(const ObservedSample& s, int t) {
  const auto v = detail::arm_values(s, t);
  if (v.size() < 2)
    throw DegenerateDesignError("arm_variance: arm " + std::to_string(t) +
                                " has fewer than 2 units");
  const double n = static_cast<double>(v.size());
  return pop_variance(v) * n / (n - 1.0);
}

// Empirical stratum shares over all enrolled units and arm-conditional
// outcome CDFs per stratum.
struct StratumEstimates {
  std::vector<std::string> labels;
  std::vector<Rat> pi_hat;   // counting ratios over n
  std::vector<StepCDF> cdf1;
  std::vector<StepCDF> cdf0;
};

inline StratumEstimates stratum_estimates(const ObservedSample& s) {
  s.validate();
  const int num_k = s.num_strata();
  std::vector<std::vector<double>> v1(static_cast<std::size_t>(num_k));
  std::vector<std::vector<double>> v0(static_cast<std::size_t>(num_k));
  std::vector<std::int64_t> count(static_cast<std::size_t>(num_k), 0);
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    const auto k = static_cast<std::size_t>(s.w[i]);
    ++count[k];
    (s.t[i] == 1 ? v1 : v0)[k].push_back(s.y[i]);
  }
  StratumEstimates est;
  est.labels = s.stratum_labels;
  for (int k = 0; k < num_k; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (v1[ku].empty() || v0[ku].empty())
      throw DegenerateDesignError("stratum '" + s.stratum_labels[ku] +
                                  "' is missing from the " +
                                  (v1[ku].empty() ? "treated" : "control") +
                                  " arm");
    est.pi_hat.push_back(Rat(count[ku], s.n()));
    est.cdf1.push_back(StepCDF::empirical(std::move(v1[ku])));
    est.cdf0.push_back(StepCDF::empirical(std::move(v0[ku])));
  }
  return est;
}

// Plug-in sharp bound estimates: stratum-weighted coupling integrals of the
// arm-conditional empirical CDFs, minus the squared effect estimate.
inline BoundPair bound_estimates_cov(const ObservedSample& s) {
  const StratumEstimates est = stratum_estimates(s);
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < est.pi_hat.size(); ++k) {
    const double pi = est.pi_hat[k].to_double();
    lo += pi * quantile_l2_comonotone(est.cdf1[k], est.cdf0[k]);
    hi += pi * quantile_l2_antimonotone(est.cdf1[k], est.cdf0[k]);
  }
  const double theta = diff_in_means(s);
  return {lo - theta * theta, hi - theta * theta, Family::kSharp,
          Level::kPlugin};
}

// Plug-in marginal bounds: couplings of the raw arm ECDFs.
inline BoundPair plugin_aronow(const ObservedSample& s) {
  const auto treated = detail::arm_values(s, 1);
  const auto control = detail::arm_values(s, 0);
  if (treated.empty() || control.empty())
    throw DegenerateDesignError("plugin_aronow: an arm is empty");
  const StepCDF f1 = StepCDF::empirical(treated);
  const StepCDF f0 = StepCDF::empirical(control);
  const double theta = diff_in_means(s);
  return {quantile_l2_comonotone(f1, f0) - theta * theta,
          quantile_l2_antimonotone(f1, f0) - theta * theta, Family::kAronow,
          Level::kPlugin};
}

// Plug-in regression bounds, reconstructed as per-arm least squares on the
// observed arm data: fitted contrast over all enrolled units plus residual
// ECDF couplings per arm.
inline BoundPair plugin_ding(const ObservedSample& s) {
  s.validate();
  std::vector<std::size_t> rows1, rows0;
  for (std::size_t i = 0; i < s.y.size(); ++i)
    (s.t[i] == 1 ? rows1 : rows0).push_back(i);
  if (rows1.empty() || rows0.empty())
    throw DegenerateDesignError("plugin_ding: an arm is empty");
  const auto g1 =
      detail::dummy_least_squares(s.y, s.w, s.num_strata(), rows1);
  const auto g0 =
      detail::dummy_least_squares(s.y, s.w, s.num_strata(), rows0);
  std::vector<double> tau_w(s.y.size());
  for (std::size_t i = 0; i < s.y.size(); ++i)
    tau_w[i] =
        detail::fitted_value(g1, s.w[i]) - detail::fitted_value(g0, s.w[i]);
  std::vector<double> e1, e0;
  e1.reserve(rows1.size());
  e0.reserve(rows0.size());
  for (std::size_t i : rows1)
    e1.push_back(s.y[i] - detail::fitted_value(g1, s.w[i]));
  for (std::size_t i : rows0)
    e0.push_back(s.y[i] - detail::fitted_value(g0, s.w[i]));
  const double base = pop_variance(tau_w);
  const StepCDF fe1 = StepCDF::empirical(std::move(e1));
  const StepCDF fe0 = StepCDF::empirical(std::move(e0));
  return {base + quantile_l2_comonotone(fe1, fe0),
          base + quantile_l2_antimonotone(fe1, fe0), Family::kDing,
          Level::kPlugin};
}

// Conservative variance given a lower-bound estimate for phi^2(tau). The
// subtracted term is clamped at zero (zero is always a valid lower bound for
// a variance, so the interval stays conservative), and so is the result.
inline double sigma_hat2_given(const ObservedSample& s, double lower_estimate) {
  const double big_n = static_cast<double>(s.population_size);
  const double n1 = static_cast<double>(s.n_arm(1));
  const double n0 = static_cast<double>(s.n_arm(0));
  const double v = (big_n / n1) * arm_variance(s, 1) +
                   (big_n / n0) * arm_variance(s, 0) -
                   std::max(lower_estimate, 0.0);
  return std::max(v, 0.0);
}

inline double lower_bound_estimate(const ObservedSample& s, CiFamily family) {
  switch (family) {
    case CiFamily::kNaiveZero:
      return 0.0;
    case CiFamily::kAronow:
      return plugin_aronow(s).lower;
    case CiFamily::kDing:
      return plugin_ding(s).lower;
    case CiFamily::kSharp:
      return bound_estimates_cov(s).lower;
    default:
      throw DomainError("lower_bound_estimate: late family in perfect-compliance path");
  }
}

inline double sigma_hat2(const ObservedSample& s, CiFamily family) {
  return sigma_hat2_given(s, lower_bound_estimate(s, family));
}

struct Interval {
  double lo{0};
  double hi{0};
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline Interval interval_around(double center, double sigma2, double alpha,
                                double big_n) {
  const double half =
      normal_upper_quantile(alpha / 2.0) * std::sqrt(sigma2 / big_n);
  return {center - half, center + half};
}

inline Interval confidence_interval(const ObservedSample& s, double alpha,
                                    CiFamily family) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("confidence_interval: alpha outside (0,1)");
  return interval_around(diff_in_means(s), sigma_hat2(s, family), alpha,
                         static_cast<double>(s.population_size));
}

// One family's conservative variance and interval, with the raw
// (pre-clamping) values retained for transparency.
struct CiResult {
  double lower_bound_raw{0};   // family lower-bound estimate, unclamped
  double lower_bound_used{0};  // after clamping at zero
  double sigma_hat2{0};        // clamped conservative variance
  Interval ci;
};

struct AteAnalysis {
  double theta_hat{0};
  double phi2_1{0};
  double phi2_0{0};
  double alpha{0};
  std::map<Family, BoundPair> bounds;  // plug-in bound estimates
  std::map<CiFamily, CiResult> ci;
};

inline AteAnalysis analyze_ate(const ObservedSample& s, double alpha,
                               const std::vector<CiFamily>& families) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("analyze_ate: alpha outside (0,1)");
  AteAnalysis a;
  a.alpha = alpha;
  a.theta_hat = diff_in_means(s);
  a.phi2_1 = arm_variance(s, 1);
  a.phi2_0 = arm_variance(s, 0);
  a.bounds[Family::kSharp] = bound_estimates_cov(s);
  for (CiFamily f : families) {
    if (f == CiFamily::kAronow) a.bounds[Family::kAronow] = plugin_aronow(s);
    if (f == CiFamily::kDing) a.bounds[Family::kDing] = plugin_ding(s);
  }
  const double big_n = static_cast<double>(s.population_size);
  for (CiFamily f : families) {
    CiResult r;
    switch (f) {
      case CiFamily::kNaiveZero:
        r.lower_bound_raw = 0.0;
        break;
      case CiFamily::kAronow:
        r.lower_bound_raw = a.bounds[Family::kAronow].lower;
        break;
      case CiFamily::kDing:
        r.lower_bound_raw = a.bounds[Family::kDing].lower;
        break;
      case CiFamily::kSharp:
        r.lower_bound_raw = a.bounds[Family::kSharp].lower;
        break;
      default:
        throw DomainError("analyze_ate: late family requested");
    }
    r.lower_bound_used = std::max(r.lower_bound_raw, 0.0);
    r.sigma_hat2 = sigma_hat2_given(s, r.lower_bound_raw);
    r.ci = interval_around(a.theta_hat, r.sigma_hat2, alpha, big_n);
    a.ci[f] = r;
  }
  return a;
}

}  // namespace sharpvar

#endif  // SHARPVAR_ESTIMATE_HPP
