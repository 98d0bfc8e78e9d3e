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

#ifndef SHARPVAR_SIMULATE_HPP
#define SHARPVAR_SIMULATE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sharpvar/bounds.hpp"
#include "sharpvar/estimate.hpp"
#include "sharpvar/late.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/rng.hpp"

namespace sharpvar {

// Uniformly random treated set of size n1 out of N, via partial
// Fisher-Yates on the index array.
inline std::vector<std::uint8_t> complete_randomization(std::int64_t n,
                                                        std::int64_t n1,
                                                        Rng& rng) {
  if (n < 0 || n1 < 0 || n1 > n)
    throw DomainError("complete_randomization: need 0 <= n1 <= N");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::vector<std::uint8_t> t(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n1; ++i) {
    const auto j =
        i + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    t[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
  }
  return t;
}

namespace detail {

// Conditional normal parameters of the simulation designs, indexed by the
// covariate value w in {1,2,3,4}. The second normal parameter is used as a
// standard deviation throughout; that reading reproduces the reference
// population values (treated-outcome dispersions of 2..5 give within-stratum
// couplings near 9 and 42, not near 7 and 13).
inline constexpr double kMuY1[4] = {3.0, 0.0, -2.0, 4.0};
inline constexpr double kSdY1[4] = {2.0, 1.5, 5.0, 4.0};
inline constexpr double kSdV[4] = {4.0, 4.5, 1.0, 2.0};  // 6 - kSdY1[w]

}  // namespace detail

// Perfect-compliance design: W uniform on {1,2,3,4}; Y1 | W=w normal around
// mu_w; Y0 = 0.3 * Y1 + V with V | W=w centered normal.
inline FinitePopulation dgp_perfect(std::int64_t n, Rng& rng) {
  if (n < 1) throw DomainError("dgp_perfect: N must be positive");
  std::vector<double> y1(static_cast<std::size_t>(n)), y0(static_cast<std::size_t>(n));
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const auto w = static_cast<std::size_t>(rng.bounded(4));
    y1[i] = rng.normal(detail::kMuY1[w], detail::kSdY1[w]);
    y0[i] = 0.3 * y1[i] + rng.normal(0.0, detail::kSdV[w]);
    labels[i] = std::to_string(w + 1);
  }
  return make_population(std::move(y1), std::move(y0), labels);
}

// Noncompliance design: compliance type with P(a,c,n) = (0.2, 0.7, 0.1);
// W | G from the three listed mass rows; Y1 | W=w as in the perfect design;
// Y0 | G=c, W=w normal around 0.3*w; Y0 = Y1 for always and never takers,
// so the exclusion restriction holds by construction and there are no
// defiers.
inline FinitePopulation dgp_noncompliance(std::int64_t n, Rng& rng) {
  if (n < 1) throw DomainError("dgp_noncompliance: N must be positive");
  static constexpr double kWGivenA[4] = {0.15, 0.20, 0.30, 0.35};
  static constexpr double kWGivenC[4] = {0.25, 0.25, 0.25, 0.25};
  static constexpr double kWGivenN[4] = {0.35, 0.30, 0.20, 0.15};
  std::vector<double> y1(static_cast<std::size_t>(n)), y0(static_cast<std::size_t>(n));
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  std::vector<Compliance> g(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const double ug = rng.next_unit();
    const Compliance gi = ug < 0.2   ? Compliance::kAlways
                          : ug < 0.9 ? Compliance::kComplier
                                     : Compliance::kNever;
    const double* row = gi == Compliance::kAlways   ? kWGivenA
                        : gi == Compliance::kComplier ? kWGivenC
                                                      : kWGivenN;
    const double uw = rng.next_unit();
    std::size_t w = 0;
    double acc = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      acc += row[j];
      if (uw < acc || j == 3) {
        w = j;
        break;
      }
    }
    y1[i] = rng.normal(detail::kMuY1[w], detail::kSdY1[w]);
    y0[i] = gi == Compliance::kComplier
                ? rng.normal(0.3 * static_cast<double>(w + 1), detail::kSdV[w])
                : y1[i];
    g[i] = gi;
    labels[i] = std::to_string(w + 1);
  }
  return make_population(std::move(y1), std::move(y0), labels, std::move(g));
}

// Rearrange outcomes so that phi^2 of the (adjusted) effects attains the
// sharp lower bound, leaving every stratum share and conditional outcome
// distribution unchanged. For a labeled population the rearrangement couples
// the complier outcomes within each stratum and leaves other units alone,
// which preserves the compliance structure and the complier mean.
inline FinitePopulation attain_lower_bound(const FinitePopulation& pop) {
  if (!pop.compliance) return extremal_population(pop, ExtremalSide::kLower);
  FinitePopulation out = pop;
  const StratumTable tab = stratum_table(pop);
  for (const auto& members : tab.members) {
    std::vector<std::size_t> compliers;
    for (std::size_t i : members)
      if ((*pop.compliance)[i] == Compliance::kComplier) compliers.push_back(i);
    std::vector<double> a, b;
    for (std::size_t i : compliers) {
      a.push_back(pop.y1[i]);
      b.push_back(pop.y0[i]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t j = 0; j < compliers.size(); ++j) {
      out.y1[compliers[j]] = a[j];
      out.y0[compliers[j]] = b[j];
    }
  }
  return out;
}

enum class Scenario { kPerfect, kNoncompliance };

struct StudyConfig {
  Scenario scenario{Scenario::kPerfect};
  std::int64_t population_size{0};
  std::int64_t n1{0};
  std::int64_t n0{0};
  int reps{0};
  double alpha{0.05};
  std::vector<CiFamily> families;
  std::uint64_t seed{0};
  bool attain_lower{false};
  int threads{1};
};

struct BoundRmse {
  double lower{0};
  double upper{0};
};

struct FamilyCiMetrics {
  double average_width{0};
  double coverage_rate{0};
};

struct StudyReport {
  double theta_truth{0};        // theta, or theta_c under noncompliance
  double phi2_effect_truth{0};  // phi^2(tau), or phi^2(tau~)
  std::map<Family, BoundPair> population_bounds;
  std::map<Family, BoundRmse> bound_rmse;
  std::map<CiFamily, FamilyCiMetrics> ci_metrics;
  int reps{0};
  int excluded_reps{0};
};

// One replication's estimates, retained for the optional per-replication log.
struct RepRecord {
  bool excluded{false};
  double theta_hat{0};
  std::map<Family, std::pair<double, double>> bound_est;
  std::map<CiFamily, std::pair<double, bool>> ci;  // width, covered
};

namespace detail {

inline RepRecord run_rep_perfect(const FinitePopulation& pop,
                                 const StudyConfig& cfg, double theta_truth,
                                 Rng rep_rng, bool want_aronow,
                                 bool want_ding) {
  RepRecord out;
  const auto assignment =
      complete_randomization(cfg.population_size, cfg.n1, rep_rng);
  const ObservedSample s = observe(pop, assignment);
  const double theta_hat = diff_in_means(s);
  out.theta_hat = theta_hat;
  const BoundPair sharp = bound_estimates_cov(s);
  out.bound_est[Family::kSharp] = {sharp.lower, sharp.upper};
  double lower_aronow = 0.0, lower_ding = 0.0;
  if (want_aronow) {
    const BoundPair b = plugin_aronow(s);
    out.bound_est[Family::kAronow] = {b.lower, b.upper};
    lower_aronow = b.lower;
  }
  if (want_ding) {
    const BoundPair b = plugin_ding(s);
    out.bound_est[Family::kDing] = {b.lower, b.upper};
    lower_ding = b.lower;
  }
  const double big_n = static_cast<double>(s.population_size);
  for (CiFamily f : cfg.families) {
    double lower = 0.0;
    if (f == CiFamily::kAronow) lower = lower_aronow;
    if (f == CiFamily::kDing) lower = lower_ding;
    if (f == CiFamily::kSharp) lower = sharp.lower;
    const double s2 = sigma_hat2_given(s, lower);
    const Interval ci = interval_around(theta_hat, s2, cfg.alpha, big_n);
    out.ci[f] = {ci.width(), ci.contains(theta_truth)};
  }
  return out;
}

inline RepRecord run_rep_late(const FinitePopulation& pop,
                              const StudyConfig& cfg, double theta_truth,
                              Rng rep_rng) {
  RepRecord out;
  const auto assignment =
      complete_randomization(cfg.population_size, cfg.n1, rep_rng);
  const ObservedSample s = observe(pop, assignment);
  const double pi_c = pi_c_hat(s);
  const double theta_c_hat = diff_in_means(s) / pi_c;
  out.theta_hat = theta_c_hat;
  const BoundPair cov = late_bound_estimates(s, true);
  const BoundPair nocov = late_bound_estimates(s, false);
  out.bound_est[Family::kSharpLate] = {cov.lower, cov.upper};
  out.bound_est[Family::kSharpLateNoCov] = {nocov.lower, nocov.upper};
  const double big_n = static_cast<double>(s.population_size);
  for (CiFamily f : cfg.families) {
    double lower = 0.0;
    if (f == CiFamily::kSharpLate) lower = cov.lower;
    if (f == CiFamily::kSharpLateNoCov) lower = nocov.lower;
    const double s2 = sigma_c_hat2_given(s, theta_c_hat, pi_c, lower);
    const Interval ci = interval_around(theta_c_hat, s2, cfg.alpha, big_n);
    out.ci[f] = {ci.width(), ci.contains(theta_truth)};
  }
  return out;
}

}  // namespace detail

// Monte Carlo study over repeated random assignments of one fixed generated
// population. The population truth is computed once; coverage is measured
// against that fixed truth. Replications use independent derived generator
// streams, so the report is identical regardless of thread count, and
// replications that hit a degenerate design are excluded and counted.
inline StudyReport run_study(const StudyConfig& cfg,
                             std::vector<RepRecord>* replog = nullptr) {
  if (cfg.reps < 1) throw ParseError("study config: reps must be >= 1");
  if (cfg.population_size < 2)
    throw ParseError("study config: population size must be >= 2");
  if (cfg.n1 + cfg.n0 != cfg.population_size)
    throw ParseError("study config: n1 + n0 must equal N (everyone enrolls)");
  if (cfg.n1 < 1 || cfg.n0 < 1)
    throw ParseError("study config: both arms must be nonempty");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ParseError("study config: alpha outside (0,1)");
  if (cfg.families.empty())
    throw ParseError("study config: no CI families requested");
  for (CiFamily f : cfg.families) {
    const bool late_family =
        f == CiFamily::kSharpLate || f == CiFamily::kSharpLateNoCov;
    if (cfg.scenario == Scenario::kPerfect && late_family)
      throw ParseError("study config: late family in perfect scenario");
    if (cfg.scenario == Scenario::kNoncompliance &&
        (f == CiFamily::kAronow || f == CiFamily::kDing ||
         f == CiFamily::kSharp))
      throw ParseError("study config: perfect-compliance family in noncompliance scenario");
  }

  const Rng root(cfg.seed);
  Rng pop_rng = root.stream(0);
  FinitePopulation pop = cfg.scenario == Scenario::kPerfect
                             ? dgp_perfect(cfg.population_size, pop_rng)
                             : dgp_noncompliance(cfg.population_size, pop_rng);
  if (cfg.attain_lower) pop = attain_lower_bound(pop);

  StudyReport rep;
  rep.reps = cfg.reps;
  const bool want_aronow =
      std::find(cfg.families.begin(), cfg.families.end(), CiFamily::kAronow) !=
      cfg.families.end();
  const bool want_ding =
      std::find(cfg.families.begin(), cfg.families.end(), CiFamily::kDing) !=
      cfg.families.end();
  double theta_truth = 0.0;
  if (cfg.scenario == Scenario::kPerfect) {
    theta_truth = ate(pop);
    rep.theta_truth = theta_truth;
    rep.phi2_effect_truth = pop_variance(unit_effects(pop));
    rep.population_bounds[Family::kSharp] = sharp_bounds_cov(pop);
    rep.population_bounds[Family::kAronow] = aronow_bounds(pop);
    rep.population_bounds[Family::kDing] = ding_bounds(pop);
  } else {
    theta_truth = late_truth(pop);
    rep.theta_truth = theta_truth;
    const double theta_c = theta_truth;
    std::vector<double> tau_adj(pop.y1.size());
    for (std::size_t i = 0; i < tau_adj.size(); ++i) {
      const Compliance g = (*pop.compliance)[i];
      tau_adj[i] = pop.y1[i] - pop.y0[i] -
                   theta_c * static_cast<double>(uptake(g, 1) - uptake(g, 0));
    }
    rep.phi2_effect_truth = pop_variance(tau_adj);
    rep.population_bounds[Family::kSharpLate] = sharp_bounds_late(pop, true);
    rep.population_bounds[Family::kSharpLateNoCov] =
        sharp_bounds_late(pop, false);
  }

  std::vector<RepRecord> outcomes(static_cast<std::size_t>(cfg.reps));
  auto worker_body = [&](int r) {
    const Rng rep_rng = root.stream(static_cast<std::uint64_t>(r) + 1);
    try {
      outcomes[static_cast<std::size_t>(r)] =
          cfg.scenario == Scenario::kPerfect
              ? detail::run_rep_perfect(pop, cfg, theta_truth, rep_rng,
                                        want_aronow, want_ding)
              : detail::run_rep_late(pop, cfg, theta_truth, rep_rng);
    } catch (const DegenerateDesignError&) {
      outcomes[static_cast<std::size_t>(r)].excluded = true;
    } catch (const WeakInstrumentError&) {
      outcomes[static_cast<std::size_t>(r)].excluded = true;
    }
  };
  if (cfg.threads > 1) {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(cfg.threads, cfg.reps);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.reps; r = next.fetch_add(1))
          worker_body(r);
      });
    for (auto& th : pool) th.join();
  } else {
    for (int r = 0; r < cfg.reps; ++r) worker_body(r);
  }

  // aggregate in replication order
  std::map<Family, std::pair<double, double>> sq_err;
  std::map<CiFamily, std::pair<double, std::int64_t>> width_cover;
  std::int64_t included = 0;
  for (const auto& o : outcomes) {
    if (o.excluded) {
      ++rep.excluded_reps;
      continue;
    }
    ++included;
    for (const auto& [fam, est] : o.bound_est) {
      const BoundPair& truth = rep.population_bounds.at(fam);
      auto& acc = sq_err[fam];
      acc.first += (est.first - truth.lower) * (est.first - truth.lower);
      acc.second += (est.second - truth.upper) * (est.second - truth.upper);
    }
    for (const auto& [fam, wc] : o.ci) {
      auto& acc = width_cover[fam];
      acc.first += wc.first;
      acc.second += wc.second ? 1 : 0;
    }
  }
  if (included == 0)
    throw DegenerateDesignError("study: every replication was degenerate");
  const double m = static_cast<double>(included);
  for (const auto& [fam, acc] : sq_err)
    rep.bound_rmse[fam] = {std::sqrt(acc.first / m), std::sqrt(acc.second / m)};
  for (const auto& [fam, acc] : width_cover)
    rep.ci_metrics[fam] = {acc.first / m,
                           static_cast<double>(acc.second) / m};
  if (replog) *replog = std::move(outcomes);
  return rep;
}

}  // namespace sharpvar

#endif  // SHARPVAR_SIMULATE_HPP
