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

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sharpvar/bounds.hpp"
#include "sharpvar/estimate.hpp"
#include "sharpvar/io.hpp"
#include "sharpvar/late.hpp"
#include "sharpvar/population.hpp"
#include "sharpvar/report.hpp"
#include "sharpvar/simulate.hpp"

namespace sv = sharpvar;

namespace {

struct IngestArgs {
  std::string input;
  std::string treatment{"t"};
  std::string outcome{"y"};
  std::string takeup{"d"};
  bool use_takeup{false};
  std::vector<std::string> covariates;
  std::vector<std::string> bin_specs;
  std::string delimiter{","};
  bool no_header{false};
  std::int64_t population_size{0};
  bool merge_sparse{false};
};

struct OutputArgs {
  std::string path;  // empty: stdout
  std::string format{"json"};
  int precision{0};  // 0: format default (17 json / 6 csv,tsv)
};

void add_ingest_options(CLI::App* cmd, IngestArgs& a, bool takeup_default) {
  cmd->add_option("-i,--input", a.input, "delimited text input file")
      ->required();
  cmd->add_option("--treatment", a.treatment,
                  "assignment column (binary 0/1)");
  cmd->add_option("--outcome", a.outcome, "outcome column (real)");
  auto* tk = cmd->add_option("--takeup", a.takeup,
                             "treatment-received column (binary 0/1)");
  if (takeup_default) a.use_takeup = true;
  tk->each([&a](const std::string&) { a.use_takeup = true; });
  cmd->add_option("--covariates", a.covariates,
                  "covariate columns, cross-classified into strata")
      ->delimiter(',');
  cmd->add_option("--bins", a.bin_specs,
                  "binning for a numeric covariate column: "
                  "COL=edges:A,B,... or COL=quantile:K (repeatable)");
  cmd->add_option("--delimiter", a.delimiter, "field delimiter (default ,)");
  cmd->add_flag("--no-header", a.no_header,
                "columns are addressed by 1-based index");
  cmd->add_option("--population-size", a.population_size,
                  "population size N when larger than the enrolled sample");
  cmd->add_flag("--merge-sparse-strata", a.merge_sparse,
                "merge strata that cannot support the analysis into their "
                "canonical neighbor");
}

void add_output_options(CLI::App* cmd, OutputArgs& o) {
  cmd->add_option("-o,--output", o.path, "output file (default stdout)");
  cmd->add_option("--format", o.format, "json, csv, or tsv")
      ->check(CLI::IsMember({"json", "csv", "tsv"}));
  cmd->add_option("--precision", o.precision,
                  "significant digits (default 17 json, 6 csv/tsv)");
}

sv::DatasetSchema to_schema(const IngestArgs& a) {
  sv::DatasetSchema schema;
  schema.treatment = a.treatment;
  schema.outcome = a.outcome;
  if (a.use_takeup) schema.takeup = a.takeup;
  schema.covariates = a.covariates;
  if (a.delimiter == "\\t" || a.delimiter == "tab")
    schema.delimiter = '\t';
  else if (a.delimiter.size() == 1)
    schema.delimiter = a.delimiter[0];
  else
    throw sv::ParseError("--delimiter must be a single character");
  schema.has_header = !a.no_header;
  schema.population_size = a.population_size;
  for (const std::string& spec : a.bin_specs) {
    const auto eq = spec.find('=');
    const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw sv::ParseError("--bins expects COL=edges:A,B,... or COL=quantile:K; got '" +
                           spec + "'");
    const std::string col = spec.substr(0, eq);
    const std::string kind = spec.substr(eq + 1, colon - eq - 1);
    const std::string rest = spec.substr(colon + 1);
    sv::ColumnBinning bin;
    if (kind == "edges") {
      bin.scheme = sv::BinScheme::kFixedEdges;
      std::stringstream ss(rest);
      std::string tok;
      while (std::getline(ss, tok, ','))
        bin.edges.push_back(std::stod(tok));
      if (bin.edges.empty())
        throw sv::ParseError("--bins edges list is empty in '" + spec + "'");
    } else if (kind == "quantile") {
      bin.scheme = sv::BinScheme::kQuantile;
      bin.bins = std::stoi(rest);
    } else {
      throw sv::ParseError("--bins scheme must be 'edges' or 'quantile'");
    }
    schema.binning[col] = bin;
  }
  return schema;
}

sv::ObservedSample load_sample(const IngestArgs& a, bool late_mode,
                               std::vector<std::string>* merges) {
  sv::ObservedSample s = sv::ingest_file(a.input, to_schema(a));
  if (a.merge_sparse) s = sv::merge_sparse_strata(std::move(s), late_mode, merges);
  return s;
}

std::vector<sv::CiFamily> parse_families(const std::vector<std::string>& names,
                                         bool late_mode) {
  std::vector<sv::CiFamily> out;
  const std::vector<sv::CiFamily> all =
      late_mode ? std::vector<sv::CiFamily>{sv::CiFamily::kNaiveZero,
                                            sv::CiFamily::kSharpLateNoCov,
                                            sv::CiFamily::kSharpLate}
                : std::vector<sv::CiFamily>{sv::CiFamily::kNaiveZero,
                                            sv::CiFamily::kAronow,
                                            sv::CiFamily::kDing,
                                            sv::CiFamily::kSharp};
  if (names.empty()) return all;
  for (const std::string& name : names) {
    bool found = false;
    for (sv::CiFamily f : all)
      if (sv::ci_family_name(f) == name) {
        out.push_back(f);
        found = true;
      }
    if (!found)
      throw sv::ParseError("unknown family '" + name + "' for this command");
  }
  return out;
}

void write_doc(const sv::Doc& doc, const OutputArgs& o) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.path.empty()) {
    file.open(o.path);
    if (!file) throw sv::ParseError("cannot open output file '" + o.path + "'");
    out = &file;
  }
  if (o.format == "json")
    sv::write_json(*out, doc, o.precision > 0 ? o.precision : 17);
  else
    sv::write_flat(*out, doc, o.format == "csv" ? ',' : '\t',
                   o.precision > 0 ? o.precision : 6);
}

sv::Doc sample_summary(const sv::ObservedSample& s, const std::string& input) {
  sv::Doc d;
  d["input"] = input;
  d["n"] = s.n();
  d["n1"] = s.n_arm(1);
  d["n0"] = s.n_arm(0);
  d["population_size"] = s.population_size;
  d["num_strata"] = s.num_strata();
  return d;
}

sv::Doc sample_diagnostics(const sv::ObservedSample& s) {
  sv::Doc d;
  double m1 = 0, m0 = 0;
  std::int64_t c1 = 0, c0 = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    const double y4 = s.y[i] * s.y[i] * s.y[i] * s.y[i];
    if (s.t[i] == 1) {
      m1 += y4;
      ++c1;
    } else {
      m0 += y4;
      ++c0;
    }
  }
  d["fourth_moment_treated"] = c1 > 0 ? m1 / static_cast<double>(c1) : 0.0;
  d["fourth_moment_control"] = c0 > 0 ? m0 / static_cast<double>(c0) : 0.0;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(s.num_strata()), 0);
  for (int w : s.w) ++counts[static_cast<std::size_t>(w)];
  std::int64_t min_count = counts.empty() ? 0 : counts[0];
  for (std::int64_t c : counts) min_count = std::min(min_count, c);
  const double k = static_cast<double>(s.num_strata());
  d["k_min_pi_hat"] = k * static_cast<double>(min_count) /
                      static_cast<double>(s.n());
  d["k2_logk_over_n"] = k * k * std::log(k) / static_cast<double>(s.n());
  if (s.d) {
    // sample analog of the design second-moment condition: the smaller
    // per-arm eigenvalue of cov(y, d)
    double lo = std::numeric_limits<double>::infinity();
    for (int arm : {0, 1}) {
      std::vector<double> ys, ds;
      for (std::size_t i = 0; i < s.y.size(); ++i)
        if (s.t[i] == arm) {
          ys.push_back(s.y[i]);
          ds.push_back(static_cast<double>((*s.d)[i]));
        }
      if (ys.size() < 2) continue;
      const double my = sv::mean(ys), md = sv::mean(ds);
      double vy = 0, vd = 0, cv = 0;
      for (std::size_t i = 0; i < ys.size(); ++i) {
        vy += (ys[i] - my) * (ys[i] - my);
        vd += (ds[i] - md) * (ds[i] - md);
        cv += (ys[i] - my) * (ds[i] - md);
      }
      const double n = static_cast<double>(ys.size());
      vy /= n;
      vd /= n;
      cv /= n;
      const double tr = vy + vd;
      const double det = vy * vd - cv * cv;
      lo = std::min(lo, 0.5 * (tr - std::sqrt(std::max(tr * tr - 4 * det, 0.0))));
    }
    d["min_eigenvalue_y_d_sample"] = lo;
  }
  return d;
}

sv::Doc bound_doc(const sv::BoundPair& b) {
  sv::Doc d;
  d["lower"] = b.lower;
  d["upper"] = b.upper;
  d["level"] = b.level == sv::Level::kPlugin ? "plugin" : "population";
  if (b.family == sv::Family::kDing) d["reconstructed"] = true;
  return d;
}

constexpr const char* kScaleNote =
    "values follow the units of the input data; no rescaling is applied";

int cmd_ate_report(const char* command, const IngestArgs& in,
                   const OutputArgs& out,
                   const std::vector<std::string>& family_names, double alpha) {
  std::vector<std::string> merges;
  const sv::ObservedSample s = load_sample(in, false, &merges);
  const auto families = parse_families(family_names, false);
  const sv::AteAnalysis a = sv::analyze_ate(s, alpha, families);
  sv::Doc doc;
  doc["command"] = command;
  doc["sample"] = sample_summary(s, in.input);
  doc["alpha"] = alpha;
  doc["theta_hat"] = a.theta_hat;
  doc["phi2_arm"] = sv::Doc{{"treated", a.phi2_1}, {"control", a.phi2_0}};
  sv::Doc bounds;
  for (const auto& [fam, b] : a.bounds) bounds[sv::family_name(fam)] = bound_doc(b);
  doc["bounds"] = bounds;
  sv::Doc cis;
  for (sv::CiFamily f : families) {
    const sv::CiResult& r = a.ci.at(f);
    sv::Doc c;
    c["lower_bound_raw"] = r.lower_bound_raw;
    c["lower_bound_used"] = r.lower_bound_used;
    c["lower_clamped"] = r.lower_bound_raw < 0.0;
    c["sigma_hat2"] = r.sigma_hat2;
    c["lo"] = r.ci.lo;
    c["hi"] = r.ci.hi;
    c["width"] = r.ci.width();
    cis[sv::ci_family_name(f)] = c;
  }
  doc["ci"] = cis;
  doc["diagnostics"] = sample_diagnostics(s);
  doc["strata_merged"] = merges;
  doc["scale_note"] = kScaleNote;
  write_doc(doc, out);
  return 0;
}

int cmd_late(const IngestArgs& in, const OutputArgs& out,
             const std::vector<std::string>& family_names, double alpha) {
  std::vector<std::string> merges;
  const sv::ObservedSample s = load_sample(in, true, &merges);
  const auto families = parse_families(family_names, true);
  const sv::LateAnalysis a = sv::analyze_late(s, alpha, families);
  sv::Doc doc;
  doc["command"] = "late";
  doc["sample"] = sample_summary(s, in.input);
  doc["alpha"] = alpha;
  doc["theta_c_hat"] = a.theta_c_hat;
  doc["pi_c_hat"] = a.pi_c_hat;
  doc["phi2_check_arm"] =
      sv::Doc{{"treated", a.phi2_check_1}, {"control", a.phi2_check_0}};
  sv::Doc lambdas;
  for (const auto& [k, l] : a.lambda) {
    lambdas[s.stratum_labels[static_cast<std::size_t>(k)]] =
        sv::Doc{{"lambda1", l.first.to_double()},
                {"lambda0", l.second.to_double()}};
  }
  doc["lambda"] = lambdas;
  sv::Doc bounds;
  for (const auto& [fam, b] : a.bounds) bounds[sv::family_name(fam)] = bound_doc(b);
  doc["bounds"] = bounds;
  sv::Doc cis;
  for (sv::CiFamily f : families) {
    const sv::LateCiResult& r = a.ci.at(f);
    sv::Doc c;
    c["lower_bound_raw"] = r.lower_bound_raw;
    c["lower_bound_used"] = r.lower_bound_used;
    c["lower_clamped"] = r.lower_bound_raw < 0.0;
    c["sigma_c_hat2"] = r.sigma_c_hat2;
    c["lo"] = r.ci.lo;
    c["hi"] = r.ci.hi;
    c["width"] = r.ci.width();
    c["p_value_less"] = r.p_value_less;
    cis[sv::ci_family_name(f)] = c;
  }
  doc["ci"] = cis;
  doc["diagnostics"] = sample_diagnostics(s);
  doc["strata_merged"] = merges;
  doc["scale_note"] = kScaleNote;
  write_doc(doc, out);
  return 0;
}

sv::StudyConfig parse_study_config(const std::string& path, int threads_flag) {
  std::ifstream in(path);
  if (!in) throw sv::ParseError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw sv::ParseError(std::string("config parse error: ") + e.what());
  }
  sv::StudyConfig cfg;
  try {
    const std::string scenario = j.at("scenario").get<std::string>();
    if (scenario == "perfect")
      cfg.scenario = sv::Scenario::kPerfect;
    else if (scenario == "noncompliance")
      cfg.scenario = sv::Scenario::kNoncompliance;
    else
      throw sv::ParseError("scenario must be 'perfect' or 'noncompliance'");
    cfg.population_size = j.at("N").get<std::int64_t>();
    cfg.n1 = j.at("n1").get<std::int64_t>();
    cfg.n0 = j.at("n0").get<std::int64_t>();
    cfg.reps = j.at("reps").get<int>();
    cfg.alpha = j.value("alpha", 0.05);
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.attain_lower = j.value("attain_lower", false);
    std::vector<std::string> fam_names;
    if (j.contains("families"))
      fam_names = j.at("families").get<std::vector<std::string>>();
    cfg.families =
        parse_families(fam_names, cfg.scenario == sv::Scenario::kNoncompliance);
  } catch (const nlohmann::json::exception& e) {
    throw sv::ParseError(std::string("config field error: ") + e.what());
  }
  int threads = threads_flag;
  if (threads <= 0) {
    if (const char* env = std::getenv("SHARPVAR_THREADS"))
      threads = std::atoi(env);
  }
  if (threads <= 0) threads = 1;
  cfg.threads = threads;
  return cfg;
}

int cmd_simulate(const std::string& config_path, const OutputArgs& out,
                 const std::string& replog_path, int threads_flag) {
  const sv::StudyConfig cfg = parse_study_config(config_path, threads_flag);
  const auto start = std::chrono::steady_clock::now();
  std::vector<sv::RepRecord> replog;
  const sv::StudyReport r =
      sv::run_study(cfg, replog_path.empty() ? nullptr : &replog);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  sv::Doc doc;
  doc["command"] = "simulate";
  sv::Doc config_echo;
  config_echo["scenario"] =
      cfg.scenario == sv::Scenario::kPerfect ? "perfect" : "noncompliance";
  config_echo["N"] = cfg.population_size;
  config_echo["n1"] = cfg.n1;
  config_echo["n0"] = cfg.n0;
  config_echo["reps"] = cfg.reps;
  config_echo["alpha"] = cfg.alpha;
  {
    std::vector<std::string> fam_names;
    for (sv::CiFamily f : cfg.families) fam_names.push_back(sv::ci_family_name(f));
    config_echo["families"] = fam_names;
  }
  config_echo["seed"] = cfg.seed;
  config_echo["attain_lower"] = cfg.attain_lower;
  doc["config"] = config_echo;
  sv::Doc truth;
  truth["theta"] = r.theta_truth;
  truth["phi2_effect"] = r.phi2_effect_truth;
  sv::Doc tb;
  for (const auto& [fam, b] : r.population_bounds)
    tb[sv::family_name(fam)] = sv::Doc{{"lower", b.lower}, {"upper", b.upper}};
  truth["bounds"] = tb;
  doc["truth"] = truth;
  sv::Doc est;
  for (const auto& [fam, rmse] : r.bound_rmse)
    est[sv::family_name(fam)] =
        sv::Doc{{"rmse_lower", rmse.lower}, {"rmse_upper", rmse.upper}};
  doc["estimators"] = est;
  sv::Doc cim;
  for (const auto& [fam, m] : r.ci_metrics)
    cim[sv::ci_family_name(fam)] = sv::Doc{{"average_width", m.average_width},
                                           {"coverage_rate", m.coverage_rate}};
  doc["ci"] = cim;
  doc["reps"] = r.reps;
  doc["excluded_reps"] = r.excluded_reps;
  write_doc(doc, out);
  std::fprintf(stderr, "study completed in %.2f s (%d reps, %d excluded)\n",
               elapsed, r.reps, r.excluded_reps);

  if (!replog_path.empty()) {
    std::ofstream log(replog_path);
    if (!log)
      throw sv::ParseError("cannot open replication log '" + replog_path + "'");
    log << "rep,excluded,theta_hat";
    for (const auto& [fam, b] : r.population_bounds)
      log << ",est_lower_" << sv::family_name(fam) << ",est_upper_"
          << sv::family_name(fam);
    for (sv::CiFamily f : cfg.families)
      log << ",width_" << sv::ci_family_name(f) << ",covered_"
          << sv::ci_family_name(f);
    log << "\n";
    for (std::size_t i = 0; i < replog.size(); ++i) {
      const sv::RepRecord& rec = replog[i];
      log << i << ',' << (rec.excluded ? 1 : 0) << ','
          << sv::format_double(rec.excluded ? 0.0 : rec.theta_hat, 17);
      for (const auto& [fam, b] : r.population_bounds) {
        (void)b;
        if (rec.excluded || !rec.bound_est.count(fam)) {
          log << ",,";
        } else {
          const auto& e = rec.bound_est.at(fam);
          log << ',' << sv::format_double(e.first, 17) << ','
              << sv::format_double(e.second, 17);
        }
      }
      for (sv::CiFamily f : cfg.families) {
        if (rec.excluded) {
          log << ",,";
        } else {
          const auto& wc = rec.ci.at(f);
          log << ',' << sv::format_double(wc.first, 17) << ','
              << (wc.second ? 1 : 0);
        }
      }
      log << "\n";
    }
  }
  return 0;
}

int cmd_example1(const OutputArgs& out) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.path.empty()) {
    file.open(out.path);
    if (!file)
      throw sv::ParseError("cannot open output file '" + out.path + "'");
    os = &file;
  }
  const int digits = out.precision > 0 ? out.precision : 17;
  *os << "p,phi2_AL,phi2_DL,phi2_L,phi2_H,phi2_DH,phi2_AH,phi2_tau\n";
  for (int j = 1; j <= 200; ++j) {
    const sv::FinitePopulation pop = sv::binary_comparison_population(j);
    const sv::BoundPair s = sv::sharp_bounds_cov(pop);
    const sv::BoundPair a = sv::aronow_bounds(pop);
    const sv::BoundPair d = sv::ding_bounds(pop);
    const double phi2 = sv::pop_variance(sv::unit_effects(pop));
    *os << sv::format_double(j / 200.0, digits) << ','
        << sv::format_double(a.lower, digits) << ','
        << sv::format_double(d.lower, digits) << ','
        << sv::format_double(s.lower, digits) << ','
        << sv::format_double(s.upper, digits) << ','
        << sv::format_double(d.upper, digits) << ','
        << sv::format_double(a.upper, digits) << ','
        << sv::format_double(phi2, digits) << "\n";
  }
  return 0;
}

int cmd_export(const IngestArgs& in, const OutputArgs& out) {
  std::vector<std::string> merges;
  const sv::ObservedSample s = load_sample(in, false, &merges);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.path.empty()) {
    file.open(out.path);
    if (!file)
      throw sv::ParseError("cannot open output file '" + out.path + "'");
    os = &file;
  }
  sv::emit_csv(s, *os);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sharpvar: variance bounds and conservative confidence intervals for "
      "randomized experiments in finite populations"};
  app.require_subcommand(1);

  IngestArgs in_bounds, in_ci, in_late, in_export;
  OutputArgs out_bounds, out_ci, out_late, out_sim, out_ex1, out_export;
  std::vector<std::string> fam_bounds, fam_ci, fam_late;
  double alpha_bounds = 0.05, alpha_ci = 0.05, alpha_late = 0.05;
  std::string config_path, replog_path;
  int threads_flag = 0;
  std::uint64_t seed_reserved = 0;

  auto* bounds_cmd = app.add_subcommand(
      "bounds", "plug-in variance-bound estimates from a dataset");
  add_ingest_options(bounds_cmd, in_bounds, false);
  add_output_options(bounds_cmd, out_bounds);
  bounds_cmd->add_option("--families", fam_bounds,
                         "bound families (naive-zero, aronow, ding, sharp)")
      ->delimiter(',');
  bounds_cmd->add_option("--alpha", alpha_bounds, "nominal level (default 0.05)");
  bounds_cmd->add_option("--seed", seed_reserved, "reserved");

  auto* ci_cmd = app.add_subcommand(
      "ci", "effect estimate with conservative confidence intervals");
  add_ingest_options(ci_cmd, in_ci, false);
  add_output_options(ci_cmd, out_ci);
  ci_cmd->add_option("--families", fam_ci,
                     "CI families (naive-zero, aronow, ding, sharp)")
      ->delimiter(',');
  ci_cmd->add_option("--alpha", alpha_ci, "nominal level (default 0.05)");
  ci_cmd->add_option("--seed", seed_reserved, "reserved");

  auto* late_cmd = app.add_subcommand(
      "late", "complier average effect under noncompliance, with intervals");
  add_ingest_options(late_cmd, in_late, true);
  add_output_options(late_cmd, out_late);
  late_cmd->add_option("--families", fam_late,
                       "CI families (naive-zero, sharp-late-nocov, sharp-late)")
      ->delimiter(',');
  late_cmd->add_option("--alpha", alpha_late, "nominal level (default 0.05)");
  late_cmd->add_option("--seed", seed_reserved, "reserved");

  auto* sim_cmd = app.add_subcommand(
      "simulate", "Monte Carlo study over repeated random assignments");
  sim_cmd->add_option("-c,--config", config_path, "study config (JSON)")
      ->required();
  add_output_options(sim_cmd, out_sim);
  sim_cmd->add_option("--replog", replog_path,
                      "write a per-replication CSV log to this path");
  sim_cmd->add_option("--threads", threads_flag,
                      "worker threads (default: SHARPVAR_THREADS or 1)");

  auto* ex1_cmd = app.add_subcommand(
      "example1",
      "bound-family comparison curves on the binary benchmark grid (CSV)");
  add_output_options(ex1_cmd, out_ex1);

  auto* export_cmd = app.add_subcommand(
      "export", "re-emit an ingested dataset in the canonical CSV form");
  add_ingest_options(export_cmd, in_export, false);
  add_output_options(export_cmd, out_export);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bounds_cmd->parsed())
      return cmd_ate_report("bounds", in_bounds, out_bounds, fam_bounds,
                            alpha_bounds);
    if (ci_cmd->parsed())
      return cmd_ate_report("ci", in_ci, out_ci, fam_ci, alpha_ci);
    if (late_cmd->parsed())
      return cmd_late(in_late, out_late, fam_late, alpha_late);
    if (sim_cmd->parsed())
      return cmd_simulate(config_path, out_sim, replog_path, threads_flag);
    if (ex1_cmd->parsed()) return cmd_example1(out_ex1);
    if (export_cmd->parsed()) return cmd_export(in_export, out_export);
  } catch (const sv::WeakInstrumentError& e) {
    std::fprintf(stderr, "error (weak instrument): %s\n", e.what());
    return 4;
  } catch (const sv::DegenerateDesignError& e) {
    std::fprintf(stderr, "error (degenerate design): %s\n", e.what());
    return 3;
  } catch (const sv::ParseError& e) {
    std::fprintf(stderr, "error (input): %s\n", e.what());
    return 2;
  } catch (const sv::DomainError& e) {
    std::fprintf(stderr, "error (input): %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
