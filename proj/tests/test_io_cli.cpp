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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sharpvar/io.hpp"
#include "sharpvar/report.hpp"
#include "sharpvar/rng.hpp"
#include "sharpvar/simulate.hpp"

using namespace sharpvar;

namespace {

struct RunResult {
  int exit_code{-1};
  std::string out;
};

// run the built CLI (path from the environment) and capture stdout
RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("SHARPVAR_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/sharpvar_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

DatasetSchema schema_tyw() {
  DatasetSchema s;
  s.covariates = {"w"};
  return s;
}

}  // namespace

TEST_CASE("ingest of a plain file") {
  const auto path =
      write_temp("basic.csv", "t,y,w\n1,2.5,a\n0,1.0,b\n1,0.5,a\n0,3.0,b\n");
  const ObservedSample s = ingest_file(path, schema_tyw());
  CHECK(s.n() == 4);
  CHECK(s.n_arm(1) == 2);
  CHECK(s.num_strata() == 2);
  CHECK(s.stratum_labels == std::vector<std::string>{"a", "b"});
  CHECK(s.population_size == 4);
  CHECK(!s.d.has_value());
}

TEST_CASE("ingest rejects malformed values with a location") {
  const auto path =
      write_temp("bad_t.csv", "t,y,w\n1,2.5,a\n2,1.0,a\n0,0.5,a\n");
  CHECK_THROWS_WITH(ingest_file(path, schema_tyw()),
                    Catch::Matchers::ContainsSubstring(":3") &&
                        Catch::Matchers::ContainsSubstring("'t'"));
  const auto missing =
      write_temp("missing_y.csv", "t,y,w\n1,,a\n0,0.5,a\n");
  CHECK_THROWS_WITH(ingest_file(missing, schema_tyw()),
                    Catch::Matchers::ContainsSubstring("missing value"));
  const auto nocol = write_temp("nocol.csv", "t,y\n1,2.0\n0,1.0\n");
  CHECK_THROWS_WITH(ingest_file(nocol, schema_tyw()),
                    Catch::Matchers::ContainsSubstring("'w'"));
}

TEST_CASE("ingest without a header uses 1-based indices") {
  const auto path = write_temp("nohdr.tsv", "1\t2.5\ta\n0\t1.0\tb\n");
  DatasetSchema s;
  s.treatment = "1";
  s.outcome = "2";
  s.covariates = {"3"};
  s.delimiter = '\t';
  s.has_header = false;
  const ObservedSample sample = ingest_file(path, s);
  CHECK(sample.n() == 2);
  CHECK(sample.stratum_labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("numeric covariates honor the binning directive") {
  std::string csv = "t,y,age\n";
  const int ages[] = {15, 19, 25, 35, 45, 55, 65, 70, 22, 33, 44, 58};
  for (int i = 0; i < 12; ++i)
    csv += std::to_string(i % 2) + "," + std::to_string(i * 0.5) + "," +
           std::to_string(ages[i]) + "\n";
  const auto path = write_temp("ages.csv", csv);
  DatasetSchema s;
  s.covariates = {"age"};
  ColumnBinning bin;
  bin.scheme = BinScheme::kFixedEdges;
  bin.edges = {20, 30, 40, 50, 60};
  s.binning["age"] = bin;
  const ObservedSample sample = ingest_file(path, s);
  CHECK(sample.num_strata() == 6);  // all six age groups are populated
  // ungrouped covariates stay categorical
  DatasetSchema raw;
  raw.covariates = {"age"};
  CHECK(ingest_file(path, raw).num_strata() == 12);
}

TEST_CASE("multiple covariates cross-classify") {
  const auto path = write_temp(
      "cross.csv",
      "t,y,sex,grp\n1,1,m,x\n0,2,f,x\n1,3,m,z\n0,4,f,z\n1,5,m,x\n");
  DatasetSchema s;
  s.covariates = {"sex", "grp"};
  const ObservedSample sample = ingest_file(path, s);
  CHECK(sample.num_strata() == 4);
  CHECK(sample.stratum_labels[0] == "m|x");
}

TEST_CASE("canonical emit/ingest round trip") {
  Rng rng(314);
  Rng gen = rng.stream(1);
  const FinitePopulation pop = dgp_noncompliance(60, gen);
  const auto assignment = complete_randomization(60, 30, gen);
  const ObservedSample s = observe(pop, assignment);
  std::ostringstream out;
  emit_csv(s, out);
  std::istringstream in(out.str());
  DatasetSchema schema;
  schema.takeup = "d";
  schema.covariates = {"w"};
  const ObservedSample back = ingest(in, schema, "<roundtrip>");
  REQUIRE(back.t == s.t);
  REQUIRE(back.y == s.y);  // full-precision outcomes survive
  REQUIRE(*back.d == *s.d);
  REQUIRE(back.w == s.w);
  REQUIRE(back.stratum_labels == s.stratum_labels);
}

TEST_CASE("sparse strata can be merged into their neighbor") {
  // stratum 'b' never appears in the control arm
  const auto path = write_temp(
      "sparse.csv", "t,y,w\n1,1,a\n0,2,a\n1,3,b\n1,4,b\n0,5,c\n1,6,c\n");
  const ObservedSample s = ingest_file(path, schema_tyw());
  CHECK_THROWS_AS(stratum_estimates(s), DegenerateDesignError);
  std::vector<std::string> merges;
  const ObservedSample merged = merge_sparse_strata(s, false, &merges);
  REQUIRE(merges.size() == 1);
  CHECK_THAT(merges[0], Catch::Matchers::ContainsSubstring("'b'"));
  CHECK(merged.num_strata() == 2);
  CHECK_NOTHROW(stratum_estimates(merged));
}

TEST_CASE("json writer emits stable full-precision documents") {
  Doc d;
  d["third"] = 1.0 / 3.0;
  d["neg"] = -0.0625;
  d["text"] = "a\"b";
  d["list"] = std::vector<int>{1, 2};
  std::ostringstream out;
  write_json(out, d, 17);
  const auto parsed = nlohmann::json::parse(out.str());
  CHECK(parsed["third"].get<double>() == 1.0 / 3.0);
  CHECK(parsed["neg"].get<double>() == -0.0625);
  CHECK(parsed["text"].get<std::string>() == "a\"b");
  std::ostringstream flat;
  write_flat(flat, d, ',', 6);
  CHECK_THAT(flat.str(), Catch::Matchers::ContainsSubstring("third,0.333333"));
  CHECK_THAT(flat.str(), Catch::Matchers::ContainsSubstring("list[1],2"));
}

TEST_CASE("cli: worked noncompliance analysis") {
  const auto path = write_temp("worked.csv",
                               "t,y,d,w\n1,2,1,a\n1,0,0,a\n0,1,0,a\n0,0,0,a\n");
  const RunResult r = run_cli("late -i " + path + " --covariates w");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["theta_c_hat"].get<double>() == 1.0);
  CHECK(doc["pi_c_hat"].get<double>() == 0.5);
  CHECK(doc["bounds"]["sharp-late"]["lower"].get<double>() == 0.0);
  CHECK(doc["bounds"]["sharp-late"]["upper"].get<double>() == 0.0);
  const double half = 1.9599639845 * std::sqrt(2.0);
  CHECK_THAT(doc["ci"]["sharp-late"]["lo"].get<double>(),
             Catch::Matchers::WithinAbs(1.0 - half, 1e-8));
  CHECK_THAT(doc["ci"]["sharp-late"]["hi"].get<double>(),
             Catch::Matchers::WithinAbs(1.0 + half, 1e-8));
  CHECK(doc["ci"]["sharp-late"].contains("p_value_less"));
  CHECK(doc["ci"]["naive-zero"].contains("p_value_less"));
}

TEST_CASE("cli: sharp interval no wider than naive on a toy file") {
  const auto path = write_temp(
      "toy.csv", "t,y,w\n1,2.5,a\n1,1.5,a\n0,1.0,a\n0,0.0,a\n1,3.5,b\n"
                 "0,2.0,b\n1,2.0,b\n0,1.0,b\n");
  const RunResult r = run_cli("ci -i " + path + " --covariates w");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["ci"]["sharp"]["width"].get<double>() <=
        doc["ci"]["naive-zero"]["width"].get<double>() + 1e-12);
  // the field set is fixed by command and flags
  const auto keys = {"command", "sample",      "alpha",
                     "theta_hat", "phi2_arm",  "bounds",
                     "ci",        "diagnostics", "strata_merged",
                     "scale_note"};
  for (const char* k : keys) CHECK(doc.contains(k));
}

TEST_CASE("cli: exit codes") {
  const auto bad = write_temp("bad.csv", "t,y,w\n2,1.0,a\n0,1.0,a\n");
  CHECK(run_cli("ci -i " + bad + " --covariates w").exit_code == 2);

  const auto sparse = write_temp(
      "sparse2.csv", "t,y,w\n1,1,a\n0,2,a\n1,3,b\n1,4,b\n0,5,a\n1,6,a\n");
  CHECK(run_cli("ci -i " + sparse + " --covariates w").exit_code == 3);
  CHECK(run_cli("ci -i " + sparse + " --covariates w --merge-sparse-strata")
            .exit_code == 0);

  const auto weak = write_temp(
      "weak.csv", "t,y,d,w\n1,1,0,a\n1,2,0,a\n0,1,0,a\n0,2,0,a\n");
  CHECK(run_cli("late -i " + weak + " --covariates w").exit_code == 4);

  const auto cfg_bad = write_temp("cfg_bad.json",
                                  "{\"scenario\": \"perfect\", \"N\": 100, "
                                  "\"n1\": 50, \"n0\": 50, \"reps\": 0, "
                                  "\"seed\": 1}");
  CHECK(run_cli("simulate -c " + cfg_bad).exit_code == 2);
  CHECK(run_cli("simulate -c /nonexistent.json").exit_code == 2);
  CHECK(run_cli("nonsense-subcommand").exit_code == 2);
}

TEST_CASE("cli: age binning through the command line") {
  // a trial-shaped file: age column binned on the fixed edges, plus a
  // second categorical covariate, cross-classified
  std::string csv = "t,y,age,sex\n";
  const int ages[] = {15, 25, 35, 45, 55, 65, 19, 28, 39, 48, 59, 70,
                      22, 33, 44, 52, 61, 18, 27, 42};
  Rng rng(1);
  for (int i = 0; i < 20; ++i)
    csv += std::to_string(i % 2) + "," +
           std::to_string(0.25 * static_cast<double>(i) + rng.next_unit()) +
           "," + std::to_string(ages[i]) + "," + (i % 4 < 2 ? "m" : "f") + "\n";
  const auto path = write_temp("actg_shape.csv", csv);
  const RunResult r = run_cli(
      "bounds -i " + path +
      " --covariates age,sex --bins age=edges:20,30,40,50,60 "
      "--merge-sparse-strata");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["bounds"].contains("sharp"));
  CHECK(doc["bounds"].contains("aronow"));
  CHECK(doc["bounds"].contains("ding"));
  CHECK(doc["ci"].contains("sharp"));
}

TEST_CASE("late-mode merging handles takeup-degenerate strata") {
  // in stratum 'b' nobody ever takes the treatment: lambda_1b = 0
  const auto path = write_temp(
      "late_sparse.csv",
      "t,y,d,w\n1,1,1,a\n1,2,0,a\n0,1,0,a\n0,2,0,a\n"
      "1,3,0,b\n1,4,0,b\n0,3,0,b\n0,4,0,b\n");
  DatasetSchema schema;
  schema.takeup = "d";
  schema.covariates = {"w"};
  const ObservedSample s = ingest_file(path, schema);
  CHECK_THROWS_AS(late_bound_estimates(s), DegenerateDesignError);
  std::vector<std::string> merges;
  const ObservedSample merged = merge_sparse_strata(s, true, &merges);
  REQUIRE(merges.size() == 1);
  CHECK(merged.num_strata() == 1);
  CHECK_NOTHROW(late_bound_estimates(merged));
  // end to end through the CLI
  const RunResult r = run_cli("late -i " + path +
                              " --covariates w --merge-sparse-strata");
  CHECK(r.exit_code == 0);
  const RunResult fail = run_cli("late -i " + path + " --covariates w");
  CHECK(fail.exit_code == 3);
}

TEST_CASE("cli: unequal-arm noncompliance study shape") {
  // synthetic data shaped like a large job-training trial: 552 control,
  // 1249 treated, roughly half of the treated actually participate,
  // binary covariates; the report must carry naive and sharp intervals
  // plus one-sided p-values
  Rng rng(2739);
  std::string csv = "t,y,d,risk,hardship\n";
  auto row = [&](int t) {
    const int d = t == 1 ? (rng.next_unit() < 0.54 ? 1 : 0) : 0;
    const double effect = d == 1 ? -0.12 : 0.0;
    const double y = effect + rng.normal(1.8, 0.65);
    csv += std::to_string(t) + "," + std::to_string(y) + "," +
           std::to_string(d) + "," + (rng.next_unit() < 0.5 ? "hi" : "lo") +
           "," + (rng.next_unit() < 0.4 ? "1" : "0") + "\n";
  };
  for (int i = 0; i < 1249; ++i) row(1);
  for (int i = 0; i < 552; ++i) row(0);
  const auto path = write_temp("jobs_shape.csv", csv);
  const RunResult r =
      run_cli("late -i " + path + " --covariates risk,hardship");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["sample"]["n1"].get<int>() == 1249);
  CHECK(doc["sample"]["n0"].get<int>() == 552);
  CHECK_THAT(doc["pi_c_hat"].get<double>(),
             Catch::Matchers::WithinAbs(0.54, 0.06));
  for (const char* fam : {"naive-zero", "sharp-late-nocov", "sharp-late"}) {
    CHECK(doc["ci"][fam].contains("p_value_less"));
    CHECK(doc["ci"][fam]["width"].get<double>() > 0.0);
  }
  // the sharp-family interval cannot be wider than the naive one here
  CHECK(doc["ci"]["sharp-late"]["width"].get<double>() <=
        doc["ci"]["naive-zero"]["width"].get<double>() + 1e-12);
}

TEST_CASE("cli: export round trip") {
  const auto path = write_temp(
      "export_in.csv",
      "t,y,d,w\n1,2.25,1,a\n1,0.125,0,a\n0,1.5,0,b\n0,0.75,0,b\n");
  const RunResult r =
      run_cli("export -i " + path + " --takeup d --covariates w");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "t,y,d,w\n1,2.25,1,a\n1,0.125,0,a\n0,1.5,0,b\n0,0.75,0,b\n");
}

TEST_CASE("cli: identical study configs give identical report bytes") {
  const auto cfg = write_temp(
      "cfg_det.json",
      "{\"scenario\": \"noncompliance\", \"N\": 120, \"n1\": 60, \"n0\": 60, "
      "\"reps\": 10, \"alpha\": 0.05, \"seed\": 321}");
  const RunResult a = run_cli("simulate -c " + cfg);
  const RunResult b = run_cli("simulate -c " + cfg + " --threads 3");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["reps"].get<int>() == 10);
  CHECK(doc["truth"]["bounds"].contains("sharp-late"));
  CHECK(doc["truth"]["bounds"].contains("sharp-late-nocov"));
}

TEST_CASE("cli: replication log rows match the report") {
  const auto cfg = write_temp(
      "cfg_log.json",
      "{\"scenario\": \"perfect\", \"N\": 80, \"n1\": 40, \"n0\": 40, "
      "\"reps\": 7, \"seed\": 5, \"families\": [\"naive-zero\", \"sharp\"]}");
  const std::string log_path = "/tmp/sharpvar_test_replog.csv";
  const RunResult r =
      run_cli("simulate -c " + cfg + " --replog " + log_path);
  REQUIRE(r.exit_code == 0);
  std::ifstream log(log_path);
  REQUIRE(log.good());
  std::string line;
  int rows = 0;
  std::getline(log, line);
  CHECK_THAT(line, Catch::Matchers::StartsWith("rep,excluded,theta_hat"));
  while (std::getline(log, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 7);
}

TEST_CASE("cli: benchmark grid output shape and orderings") {
  const RunResult r = run_cli("example1");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "p,phi2_AL,phi2_DL,phi2_L,phi2_H,phi2_DH,phi2_AH,phi2_tau");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::vector<double> cell;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cell.push_back(std::stod(tok));
    REQUIRE(cell.size() == 8);
    const double al = cell[1], dl = cell[2], lo = cell[3], hi = cell[4],
                 dh = cell[5], ah = cell[6], tau = cell[7];
    REQUIRE(lo >= std::max(al, dl) - 1e-9);
    REQUIRE(hi <= std::min(ah, dh) + 1e-9);
    REQUIRE(lo <= tau + 1e-9);
    REQUIRE(tau <= hi + 1e-9);
  }
  REQUIRE(rows == 200);
}
