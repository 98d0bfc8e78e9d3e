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

#ifndef SHARPVAR_POPULATION_HPP
#define SHARPVAR_POPULATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpvar/errors.hpp"
#include "sharpvar/rational.hpp"
#include "sharpvar/step_function.hpp"

namespace sharpvar {

// Kahan-Babuska compensated sum; keeps the descriptive functionals accurate
// to a few ulps independent of summation order, which the cross-identity
// checks (law of total expectation, zero-mean contrasts) rely on.
inline double compensated_sum(std::span<const double> a) {
  double sum = 0.0, comp = 0.0;
  for (double x : a) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline double mean(std::span<const double> a) {
  if (a.empty()) throw DomainError("mean: empty sequence");
  return compensated_sum(a) / static_cast<double>(a.size());
}

// Population variance: divisor N, not N-1.
inline double pop_variance(std::span<const double> a) {
  if (a.empty()) throw DomainError("pop_variance: empty sequence");
  const double mu = mean(a);
  double sum = 0.0, comp = 0.0;
  for (double x : a) {
    const double sq = (x - mu) * (x - mu);
    const double t = sum + sq;
    comp += std::fabs(sum) >= std::fabs(sq) ? (sum - t) + sq : (sq - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(a.size());
}

enum class Compliance : std::uint8_t { kAlways, kComplier, kNever, kDefier };

// Treatment uptake d_t implied by a compliance type.
inline int uptake(Compliance g, int t) {
  switch (g) {
    case Compliance::kAlways:
      return 1;
    case Compliance::kComplier:
      return t;
    case Compliance::kNever:
      return 0;
    case Compliance::kDefier:
      return 1 - t;
  }
  return 0;
}

// Complete potential-outcome table: both potential outcomes and the stratum
// key for every unit, with optional compliance types. Stratum keys are
// opaque labels canonicalized to indices 0..K-1 in order of first
// appearance.
struct FinitePopulation {
  std::vector<double> y1;
  std::vector<double> y0;
  std::vector<int> w;                       // canonical stratum index
  std::vector<std::string> stratum_labels;  // size K
  std::optional<std::vector<Compliance>> compliance;

  std::int64_t size() const { return static_cast<std::int64_t>(y1.size()); }
  int num_strata() const { return static_cast<int>(stratum_labels.size()); }

  void validate() const {
    const auto n = y1.size();
    if (n == 0) throw DomainError("FinitePopulation: empty population");
    if (y0.size() != n || w.size() != n)
      throw DomainError("FinitePopulation: column lengths differ");
    if (compliance && compliance->size() != n)
      throw DomainError("FinitePopulation: compliance length differs");
    std::vector<bool> seen(stratum_labels.size(), false);
    for (int k : w) {
      if (k < 0 || k >= num_strata())
        throw DomainError("FinitePopulation: stratum index out of range");
      seen[static_cast<std::size_t>(k)] = true;
    }
    for (bool s : seen)
      if (!s) throw DomainError("FinitePopulation: empty stratum");
  }
};

// Build a population from raw stratum labels, canonicalizing key order.
inline FinitePopulation make_population(
    std::vector<double> y1, std::vector<double> y0,
    const std::vector<std::string>& labels,
    std::optional<std::vector<Compliance>> compliance = std::nullopt) {
  FinitePopulation pop;
  pop.y1 = std::move(y1);
  pop.y0 = std::move(y0);
  pop.compliance = std::move(compliance);
  pop.w.reserve(labels.size());
  std::map<std::string, int> index;
  for (const auto& lab : labels) {
    auto [it, inserted] =
        index.emplace(lab, static_cast<int>(pop.stratum_labels.size()));
    if (inserted) pop.stratum_labels.push_back(lab);
    pop.w.push_back(it->second);
  }
  pop.validate();
  return pop;
}

// Unit indices per stratum plus exact stratum shares (counting ratios, so
// the shares sum to one without float accumulation).
struct StratumTable {
  std::vector<std::vector<std::size_t>> members;
  std::vector<Rat> pi;

  int num_strata() const { return static_cast<int>(members.size()); }
};

inline StratumTable stratum_table(const FinitePopulation& pop) {
  StratumTable tab;
  tab.members.resize(static_cast<std::size_t>(pop.num_strata()));
  for (std::size_t i = 0; i < pop.w.size(); ++i)
    tab.members[static_cast<std::size_t>(pop.w[i])].push_back(i);
  tab.pi.reserve(tab.members.size());
  for (const auto& m : tab.members)
    tab.pi.push_back(Rat(static_cast<std::int64_t>(m.size()), pop.size()));
  return tab;
}

// Average treatment effect: mu(y1) - mu(y0).
inline double ate(const FinitePopulation& pop) {
  return mean(pop.y1) - mean(pop.y0);
}

inline std::vector<double> unit_effects(const FinitePopulation& pop) {
  std::vector<double> tau(pop.y1.size());
  for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = pop.y1[i] - pop.y0[i];
  return tau;
}

// Average treatment effect among compliers.
inline double late_truth(const FinitePopulation& pop) {
  if (!pop.compliance)
    throw DomainError("late_truth: population has no compliance types");
  std::vector<double> tau_c;
  for (std::size_t i = 0; i < pop.y1.size(); ++i)
    if ((*pop.compliance)[i] == Compliance::kComplier)
      tau_c.push_back(pop.y1[i] - pop.y0[i]);
  if (tau_c.empty()) throw WeakInstrumentError("late_truth: no compliers");
  return mean(tau_c);
}

// Empirical CDF of potential outcome t within stratum k.
inline StepCDF conditional_cdf(const FinitePopulation& pop, int t, int k) {
  if (t != 0 && t != 1) throw DomainError("conditional_cdf: t must be 0 or 1");
  if (k < 0 || k >= pop.num_strata())
    throw DomainError("conditional_cdf: unknown stratum key");
  std::vector<double> values;
  const auto& y = t == 1 ? pop.y1 : pop.y0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (pop.w[i] == k) values.push_back(y[i]);
  return StepCDF::empirical(std::move(values));
}

// Numeric-covariate stratification. Group ids are 1-based and contiguous;
// group j collects values in (edges[j-2], edges[j-1]], with the open ends
// below the first and above the last edge.
inline std::vector<int> stratify_fixed_edges(std::span<const double> values,
                                             const std::vector<double>& edges) {
  if (values.empty()) throw DomainError("stratify: empty input");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw DomainError("stratify: cut points must be strictly increasing");
  std::vector<int> keys;
  keys.reserve(values.size());
  for (double v : values) {
    const auto below =
        std::lower_bound(edges.begin(), edges.end(), v) - edges.begin();
    keys.push_back(static_cast<int>(below) + 1);
  }
  return keys;
}

enum class BinScheme { kFixedEdges, kQuantile };

// Quantile binning: cut points at the j/bins empirical quantiles.
inline std::vector<int> stratify_quantile(std::span<const double> values,
                                          int bins) {
  if (values.empty()) throw DomainError("stratify: empty input");
  if (bins < 1) throw DomainError("stratify: bins must be >= 1");
  if (bins == 1) return std::vector<int>(values.size(), 1);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> edges;
  for (int j = 1; j < bins; ++j) {
    const auto rank = (n * static_cast<std::size_t>(j)) / static_cast<std::size_t>(bins);
    if (rank == 0) continue;
    const double e = sorted[rank - 1];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  return stratify_fixed_edges(values, edges);
}

struct DiagnosticsReport {
  double fourth_moment_y1{0};  // (1/N) sum y1^4
  double fourth_moment_y0{0};
  double c_m_hat{0};           // max of the two fourth moments
  double c_pi_hat{0};          // K * min_k pi_k
  double k2_logk_over_n{0};    // K^2 log K / N
  std::optional<double> pi_c;
  std::optional<double> vn_min_eigenvalue;
  std::vector<std::string> warnings;
};

namespace detail {

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double min_eigenvalue_symmetric(std::vector<std::vector<double>> m,
                                       double tol = 1e-12) {
  const std::size_t d = m.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += m[p][q] * m[p][q];
    if (off <= tol * tol) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::fabs(m[p][q]) <= 1e-300) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < d; ++r) {
          const double mrp = m[r][p], mrq = m[r][q];
          m[r][p] = c * mrp - s * mrq;
          m[r][q] = s * mrp + c * mrq;
        }
        for (std::size_t r = 0; r < d; ++r) {
          const double mpr = m[p][r], mqr = m[q][r];
          m[p][r] = c * mpr - s * mqr;
          m[q][r] = s * mpr + c * mqr;
        }
      }
    }
  }
  double lo = m[0][0];
  for (std::size_t p = 1; p < d; ++p) lo = std::min(lo, m[p][p]);
  return lo;
}

}  // namespace detail

// Regularity-condition diagnostics: the empirical analogs of the moment,
// positivity and stratum-count conditions behind the consistency results.
// Advisory only; never blocks any computation.
inline DiagnosticsReport condition_diagnostics(const FinitePopulation& pop,
                                               std::int64_t n1,
                                               std::int64_t n0) {
  DiagnosticsReport rep;
  const double n = static_cast<double>(pop.size());
  double m1 = 0, m0 = 0;
  for (std::size_t i = 0; i < pop.y1.size(); ++i) {
    m1 += std::pow(pop.y1[i], 4);
    m0 += std::pow(pop.y0[i], 4);
  }
  rep.fourth_moment_y1 = m1 / n;
  rep.fourth_moment_y0 = m0 / n;
  rep.c_m_hat = std::max(rep.fourth_moment_y1, rep.fourth_moment_y0);

  const StratumTable tab = stratum_table(pop);
  const int k = tab.num_strata();
  Rat min_pi = tab.pi[0];
  for (const Rat& p : tab.pi)
    if (p < min_pi) min_pi = p;
  rep.c_pi_hat = static_cast<double>(k) * min_pi.to_double();
  rep.k2_logk_over_n =
      static_cast<double>(k) * static_cast<double>(k) * std::log(k) / n;

  if (pop_variance(pop.y1) == 0.0 || pop_variance(pop.y0) == 0.0)
    rep.warnings.push_back("a potential-outcome column is constant");
  for (int kk = 0; kk < k; ++kk) {
    const double expected =
        tab.pi[static_cast<std::size_t>(kk)].to_double() *
        static_cast<double>(std::min(n1, n0));
    if (expected < 2.0) {
      rep.warnings.push_back("stratum " + std::to_string(kk) +
                             " expects fewer than 2 units in an arm");
      break;
    }
  }

  if (pop.compliance) {
    std::int64_t nc = 0;
    std::vector<std::vector<double>> z(pop.y1.size(), std::vector<double>(4));
    for (std::size_t i = 0; i < pop.y1.size(); ++i) {
      const Compliance g = (*pop.compliance)[i];
      if (g == Compliance::kComplier) ++nc;
      z[i] = {pop.y1[i], pop.y0[i], static_cast<double>(uptake(g, 1)),
              static_cast<double>(uptake(g, 0))};
    }
    rep.pi_c = static_cast<double>(nc) / n;
    std::vector<double> bar(4, 0.0);
    for (const auto& zi : z)
      for (int c = 0; c < 4; ++c) bar[static_cast<std::size_t>(c)] += zi[static_cast<std::size_t>(c)];
    for (auto& b : bar) b /= n;
    std::vector<std::vector<double>> v(4, std::vector<double>(4, 0.0));
    for (const auto& zi : z)
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
          v[a][b] += (zi[a] - bar[a]) * (zi[b] - bar[b]);
    for (auto& row : v)
      for (auto& x : row) x /= n;
    rep.vn_min_eigenvalue = detail::min_eigenvalue_symmetric(std::move(v), 1e-10);
    if (*rep.vn_min_eigenvalue < 1e-8)
      rep.warnings.push_back("second-moment matrix of (y1, y0, d1, d0) is near-singular");
  }
  return rep;
}

// Assignment-revealed data: one record per enrolled unit. population_size
// may exceed n when only part of the population is enrolled.
struct ObservedSample {
  std::vector<std::uint8_t> t;
  std::vector<double> y;
  std::optional<std::vector<std::uint8_t>> d;
  std::vector<int> w;
  std::vector<std::string> stratum_labels;
  std::int64_t population_size{0};

  std::int64_t n() const { return static_cast<std::int64_t>(t.size()); }
  std::int64_t n_arm(int arm) const {
    std::int64_t c = 0;
    for (auto ti : t) c += (ti == arm ? 1 : 0);
    return c;
  }
  int num_strata() const { return static_cast<int>(stratum_labels.size()); }

  void validate() const {
    const auto m = t.size();
    if (m == 0) throw DomainError("ObservedSample: no records");
    if (y.size() != m || w.size() != m)
      throw DomainError("ObservedSample: column lengths differ");
    if (d && d->size() != m)
      throw DomainError("ObservedSample: takeup column length differs");
    if (population_size < n())
      throw DomainError("ObservedSample: population size below sample size");
    for (auto ti : t)
      if (ti != 0 && ti != 1) throw DomainError("ObservedSample: t not binary");
  }
};

// Reveal the assigned-arm potential outcome (and uptake) for every unit.
inline ObservedSample observe(const FinitePopulation& pop,
                              const std::vector<std::uint8_t>& assignment) {
  if (assignment.size() != pop.y1.size())
    throw DomainError("observe: assignment length differs from population");
  ObservedSample s;
  s.t = assignment;
  s.y.resize(assignment.size());
  s.w = pop.w;
  s.stratum_labels = pop.stratum_labels;
  s.population_size = pop.size();
  if (pop.compliance) s.d.emplace(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int ti = assignment[i];
    s.y[i] = ti == 1 ? pop.y1[i] : pop.y0[i];
    if (pop.compliance)
      (*s.d)[i] = static_cast<std::uint8_t>(uptake((*pop.compliance)[i], ti));
  }
  return s;
}

}  // namespace sharpvar

#endif  // SHARPVAR_POPULATION_HPP
