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

// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the process exits nonzero if any criterion fails. Run with a list of
// criterion numbers to execute a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "sharpvar/bounds.hpp"
#include "sharpvar/estimate.hpp"
#include "sharpvar/late.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/rng.hpp"
#include "sharpvar/simulate.hpp"
#include "sharpvar/step_function.hpp"
#include "sharpvar/transport.hpp"

using namespace sharpvar;

namespace {

struct Checker {
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void check_close(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: got %.12g, want %.12g +/- %.3g",
                    what.c_str(), got, want, tol);
      failures.push_back(buf);
    }
  }
  void check_in(double got, double lo, double hi, const std::string& what) {
    if (!(got >= lo && got <= hi)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: got %.12g, want in [%g, %g]",
                    what.c_str(), got, lo, hi);
      failures.push_back(buf);
    }
  }
};

FinitePopulation random_population(Rng& rng, int max_n, int max_k) {
  const int k = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_k)));
  const int n = 2 * k + 2 +
                static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_n - 2 * k - 2)));
  std::vector<double> y1, y0;
  std::vector<std::string> w;
  for (int i = 0; i < n; ++i) {
    y1.push_back(rng.normal(1.0, 2.0));
    y0.push_back(rng.normal(-0.5, 1.5));
    w.push_back(std::to_string(
        i < 2 * k ? i / 2
                  : static_cast<int>(rng.bounded(static_cast<std::uint64_t>(k)))));
  }
  return make_population(std::move(y1), std::move(y0), w);
}

StudyConfig perfect_config(std::int64_t n, int reps, std::uint64_t seed) {
  StudyConfig cfg;
  cfg.scenario = Scenario::kPerfect;
  cfg.population_size = n;
  cfg.n1 = cfg.n0 = n / 2;
  cfg.reps = reps;
  cfg.alpha = 0.05;
  cfg.families = {CiFamily::kNaiveZero, CiFamily::kAronow, CiFamily::kDing,
                  CiFamily::kSharp};
  cfg.seed = seed;
  return cfg;
}

StudyConfig late_config(std::int64_t n, int reps, std::uint64_t seed) {
  StudyConfig cfg;
  cfg.scenario = Scenario::kNoncompliance;
  cfg.population_size = n;
  cfg.n1 = cfg.n0 = n / 2;
  cfg.reps = reps;
  cfg.alpha = 0.05;
  cfg.families = {CiFamily::kNaiveZero, CiFamily::kSharpLateNoCov,
                  CiFamily::kSharpLate};
  cfg.seed = seed;
  return cfg;
}

// 1. closed-form reproduction of the binary benchmark grid
void criterion_1(Checker& c) {
  for (int j = 1; j <= 200; ++j) {
    const auto pop = binary_comparison_population(j);
    const BoundPair s = sharp_bounds_cov(pop);
    const BoundPair a = aronow_bounds(pop);
    const BoundPair d = ding_bounds(pop);
    c.check(s.lower >= std::max(a.lower, d.lower) - 1e-9,
            "lower dominance fails at j=" + std::to_string(j));
    c.check(s.upper <= std::min(a.upper, d.upper) + 1e-9,
            "upper dominance fails at j=" + std::to_string(j));
  }
  const auto pop = binary_comparison_population(150);  // p = 3/4
  const BoundPair s = sharp_bounds_cov(pop);
  const BoundPair a = aronow_bounds(pop);
  c.check_close(s.lower, 2.0 / 9.0, 1e-12, "sharp lower at p=3/4");
  c.check_close(s.upper, 5.0 / 9.0, 1e-12, "sharp upper at p=3/4");
  c.check_close(a.lower, 2.0 / 9.0, 1e-12, "marginal lower at p=3/4");
  c.check_close(a.upper, 8.0 / 9.0, 1e-12, "marginal upper at p=3/4");
}

// 2. extremal populations preserve the identified quantities and attain
// the bounds
void criterion_2(Checker& c) {
  Rng rng(92001);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pop = random_population(rng, 200, 5);
    const BoundPair b = sharp_bounds_cov(pop);
    const double phi2 = pop_variance(unit_effects(pop));
    c.check(b.lower <= phi2 + 1e-10 && phi2 <= b.upper + 1e-10,
            "phi2(tau) escapes the sharp pair at trial " + std::to_string(trial));
    const StratumTable tab = stratum_table(pop);
    for (ExtremalSide side : {ExtremalSide::kLower, ExtremalSide::kUpper}) {
      const auto ext = extremal_population(pop, side);
      bool preserved = ext.w == pop.w;
      for (int k = 0; preserved && k < tab.num_strata(); ++k) {
        std::vector<double> a1, a0, b1, b0;
        for (std::size_t i : tab.members[static_cast<std::size_t>(k)]) {
          a1.push_back(pop.y1[i]);
          a0.push_back(pop.y0[i]);
          b1.push_back(ext.y1[i]);
          b0.push_back(ext.y0[i]);
        }
        std::sort(a1.begin(), a1.end());
        std::sort(a0.begin(), a0.end());
        std::sort(b1.begin(), b1.end());
        std::sort(b0.begin(), b0.end());
        preserved = a1 == b1 && a0 == b0;
      }
      c.check(preserved, "extremal table changes a conditional distribution");
      const double attained = pop_variance(unit_effects(ext));
      const double target = side == ExtremalSide::kLower ? b.lower : b.upper;
      c.check_close(attained, target, 1e-10,
                    "extremal variance at trial " + std::to_string(trial));
    }
  }
}

// 3. couplings equal the pairing-enumeration oracle exactly
void criterion_3(Checker& c) {
  Rng rng(92003);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.bounded(7));
    std::vector<double> a, b;
    for (int i = 0; i < m; ++i) {
      a.push_back(rng.normal(0.0, 3.0));
      b.push_back(rng.normal(1.0, 2.0));
    }
    const auto [lo, hi] = brute_force_extremes(a, b);
    const StepCDF fa = StepCDF::empirical(a);
    const StepCDF fb = StepCDF::empirical(b);
    c.check(quantile_l2_comonotone(fa, fb) == lo,
            "comonotone != enumeration min at trial " + std::to_string(trial));
    c.check(quantile_l2_antimonotone(fa, fb) == hi,
            "antimonotone != enumeration max at trial " + std::to_string(trial));
  }
}

// 4. double-integral identity agrees with the quantile integral
void criterion_4(Checker& c) {
  Rng rng(92004);
  for (int trial = 0; trial < 500; ++trial) {
    auto sample = [&] {
      const int m = 1 + static_cast<int>(rng.bounded(10));
      std::vector<double> v;
      for (int i = 0; i < m; ++i) v.push_back(8.0 * (rng.next_unit() - 0.5));
      return StepCDF::empirical(std::move(v));
    };
    const StepCDF f = sample();
    const StepCDF g = sample();
    const double gap =
        std::fabs(representation_check(f, g) - quantile_l2_comonotone(f, g));
    c.check(gap <= 1e-9, "identity gap " + std::to_string(gap) + " at trial " +
                             std::to_string(trial));
  }
}

// 5. enumerating every assignment reproduces the design-based moments
void criterion_5(Checker& c) {
  Rng rng(92005);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4 + static_cast<int>(rng.bounded(7));  // N <= 10
    std::vector<double> y1, y0;
    std::vector<std::string> w;
    for (int i = 0; i < n; ++i) {
      y1.push_back(rng.normal(0.5, 1.0));
      y0.push_back(rng.normal(0.0, 1.0));
      w.push_back("a");
    }
    const auto pop = make_population(y1, y0, w);
    const int n1 =
        1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - 1)));
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
    std::fill(mask.begin(), mask.begin() + n1, 1);
    std::sort(mask.begin(), mask.end());
    double sum = 0.0, sumsq = 0.0;
    std::int64_t count = 0;
    do {
      const double est = diff_in_means(observe(pop, mask));
      sum += est;
      sumsq += est * est;
      ++count;
    } while (std::next_permutation(mask.begin(), mask.end()));
    const double mean_est = sum / static_cast<double>(count);
    const double var_est =
        sumsq / static_cast<double>(count) - mean_est * mean_est;
    c.check_close(mean_est, ate(pop), 1e-10,
                  "enumeration mean at trial " + std::to_string(trial));
    const double sigma2 =
        (n / static_cast<double>(n1)) * pop_variance(pop.y1) +
        (n / static_cast<double>(n - n1)) * pop_variance(pop.y0) -
        pop_variance(unit_effects(pop));
    c.check_close(var_est, sigma2 / (n - 1.0), 1e-10,
                  "enumeration variance at trial " + std::to_string(trial));
  }
}

// 6. population bound values at the reference size
void criterion_6(Checker& c) {
  Rng root(92006);
  Rng gen = root.stream(0);
  const auto pop = dgp_perfect(2000, gen);
  const BoundPair sharp = sharp_bounds_cov(pop);
  c.check_in(sharp.lower, 8.0, 10.5, "sharp lower at N=2000");
  c.check_in(sharp.upper, 38.0, 47.0, "sharp upper at N=2000");
  c.check_in(pop_variance(unit_effects(pop)), 16.0, 21.0, "phi2(tau) at N=2000");
}

// 7. interval width and coverage of the N=800 study
void criterion_7(Checker& c) {
  const StudyReport r = run_study(perfect_config(800, 1000, 31415));
  const auto& sharp = r.ci_metrics.at(CiFamily::kSharp);
  const auto& naive = r.ci_metrics.at(CiFamily::kNaiveZero);
  c.check_close(sharp.average_width, 0.945, 0.05, "sharp-family average width");
  c.check_in(sharp.coverage_rate, 0.955, 0.985, "sharp-family coverage");
  c.check(sharp.average_width < naive.average_width,
          "sharp interval not narrower than naive");
}

// 8. bound-estimator consistency: RMSE falls from N=400 to N=2000
void criterion_8(Checker& c) {
  const StudyReport p400 = run_study(perfect_config(400, 1000, 92008));
  const StudyReport p2000 = run_study(perfect_config(2000, 1000, 92008));
  c.check(p2000.bound_rmse.at(Family::kSharp).lower <
              p400.bound_rmse.at(Family::kSharp).lower,
          "sharp lower-bound RMSE does not fall with N (perfect)");
  c.check(p2000.bound_rmse.at(Family::kSharp).upper <
              p400.bound_rmse.at(Family::kSharp).upper,
          "sharp upper-bound RMSE does not fall with N (perfect)");
  const StudyReport l400 = run_study(late_config(400, 1000, 92018));
  const StudyReport l2000 = run_study(late_config(2000, 1000, 92018));
  c.check(l2000.bound_rmse.at(Family::kSharpLate).lower <
              l400.bound_rmse.at(Family::kSharpLate).lower,
          "late lower-bound RMSE does not fall with N");
  c.check(l2000.bound_rmse.at(Family::kSharpLate).upper <
              l400.bound_rmse.at(Family::kSharpLate).upper,
          "late upper-bound RMSE does not fall with N");
}

// 9. noncompliance bounds and intervals at the reference sizes
void criterion_9(Checker& c) {
  for (std::int64_t n : {400LL, 800LL, 2000LL}) {
    Rng root(static_cast<std::uint64_t>(92009 + n));
    Rng gen = root.stream(0);
    const auto pop = dgp_noncompliance(n, gen);
    const BoundPair cov = sharp_bounds_late(pop, true);
    const BoundPair nocov = sharp_bounds_late(pop, false);
    c.check(cov.lower > nocov.lower,
            "covariate lower bound not above no-covariate at N=" +
                std::to_string(n));
    c.check(cov.upper < nocov.upper,
            "covariate upper bound not below no-covariate at N=" +
                std::to_string(n));
    if (n == 2000) {
      c.check_in(cov.lower, 8.0, 11.5, "covariate lower bound at N=2000");
      c.check_in(cov.upper, 25.0, 32.0, "covariate upper bound at N=2000");
    }
  }
  const StudyReport r = run_study(late_config(2000, 1000, 5));
  const auto& lc = r.ci_metrics.at(CiFamily::kSharpLate);
  c.check_close(lc.average_width, 0.893, 0.06, "late sharp-family average width");
  c.check_in(lc.coverage_rate, 0.95, 0.985, "late sharp-family coverage");
}

// 10. coverage stays honest when the variance attains its upper bound
void criterion_10(Checker& c) {
  StudyConfig cfg = perfect_config(800, 1000, 92010);
  cfg.attain_lower = true;
  const StudyReport r = run_study(cfg);
  c.check(r.ci_metrics.at(CiFamily::kSharp).coverage_rate >= 0.935,
          "worst-case coverage below 93.5% (perfect)");
  StudyConfig lcfg = late_config(800, 1000, 92020);
  lcfg.attain_lower = true;
  const StudyReport lr = run_study(lcfg);
  c.check(lr.ci_metrics.at(CiFamily::kSharpLate).coverage_rate >= 0.935,
          "worst-case coverage below 93.5% (late)");
}

// 11. structural identities of the noncompliance machinery
void criterion_11(Checker& c) {
  Rng root(92011);
  for (int trial = 0; trial < 20; ++trial) {
    Rng gen = root.stream(static_cast<std::uint64_t>(trial));
    const auto pop = dgp_noncompliance(400, gen);
    const double theta_c = late_truth(pop);
    std::vector<double> adj(pop.y1.size());
    bool off_compliers_zero = true;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      const Compliance g = (*pop.compliance)[i];
      adj[i] = pop.y1[i] - pop.y0[i] -
               theta_c * static_cast<double>(uptake(g, 1) - uptake(g, 0));
      if (g != Compliance::kComplier && adj[i] != 0.0)
        off_compliers_zero = false;
    }
    c.check(off_compliers_zero, "adjusted effect nonzero off the compliers");
    c.check_close(mean(adj), 0.0, 1e-12,
                  "adjusted effects do not average to zero");

    const auto assignment =
        complete_randomization(pop.size(), pop.size() / 2, gen);
    const ObservedSample s = observe(pop, assignment);
    const Rat pi_c = pi_c_hat_exact(s);
    Rat sum(0, 1);
    bool products_exact = true;
    for (int k = 0; k < s.num_strata(); ++k) {
      const Rat l1 = lambda_hats(s, k).first;
      sum = sum + l1;
      if (pi_c.num() != 0 && !(pi_c * (l1 / pi_c) == l1)) products_exact = false;
    }
    c.check(sum == pi_c, "lambda sum differs from the complier share");
    c.check(products_exact, "weight identity fails");
  }

  Rng rng(92111);
  for (int trial = 0; trial < 500; ++trial) {
    SignedStepFunction f;
    const int m = 2 + static_cast<int>(rng.bounded(8));
    double x = -4.0;
    for (int j = 0; j < m; ++j) {
      x += 0.1 + rng.next_unit();
      f.breakpoints.push_back(x);
      f.values.push_back(
          Rat(static_cast<std::int64_t>(rng.bounded(181)) - 40, 100));
    }
    f.values.back() = Rat(1, 1);
    const StepCDF env = monotone_envelope(f);
    for (int u200 = 1; u200 < 200; ++u200) {
      const double u = u200 / 200.0;
      if (generalized_inverse(env, u) != generalized_inverse(f, u)) {
        c.check(false, "envelope inverse differs at trial " +
                           std::to_string(trial));
        break;
      }
    }
  }
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Checker&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "benchmark-grid closed forms and dominance", criterion_1},
      {2, "extremal populations attain the sharp bounds", criterion_2},
      {3, "pairing-enumeration oracle agreement", criterion_3},
      {4, "double-integral identity cross-check", criterion_4},
      {5, "exact design-based moments by assignment enumeration", criterion_5},
      {6, "population bound values at N=2000", criterion_6},
      {7, "interval width and coverage at N=800", criterion_7},
      {8, "bound-estimator RMSE falls with N", criterion_8},
      {9, "noncompliance bounds and intervals", criterion_9},
      {10, "worst-case coverage at the attained bound", criterion_10},
      {11, "structural identities", criterion_11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& cr : criteria) {
    if (!selected.empty() && !selected.count(cr.id)) continue;
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.fn(checker);
    } catch (const std::exception& e) {
      checker.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (checker.failures.empty()) {
      std::printf("[PASS] %2d. %s (%.2f s)\n", cr.id, cr.name, secs);
    } else {
      ++failed;
      std::printf("[FAIL] %2d. %s (%.2f s): %s%s\n", cr.id, cr.name, secs,
                  checker.failures.front().c_str(),
                  checker.failures.size() > 1
                      ? (" (+" + std::to_string(checker.failures.size() - 1) +
                         " more)")
                            .c_str()
                      : "");
    }
  }
  return failed == 0 ? 0 : 1;
}
