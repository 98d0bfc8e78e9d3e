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

#ifndef SHARPVAR_IO_HPP
#define SHARPVAR_IO_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sharpvar/errors.hpp"
#include "sharpvar/late.hpp"
#include "sharpvar/population.hpp"

namespace sharpvar {

// How a numeric covariate column is turned into stratum groups.
struct ColumnBinning {
  BinScheme scheme{BinScheme::kFixedEdges};
  std::vector<double> edges;  // for kFixedEdges
  int bins{0};                // for kQuantile
};

// Column roles for delimited text ingestion. Columns are addressed by header
// name, or by 1-based index when the file has no header row. Multiple
// covariate columns are cross-classified into a single stratum key.
struct DatasetSchema {
  std::string treatment{"t"};
  std::string outcome{"y"};
  std::optional<std::string> takeup;
  std::vector<std::string> covariates;
  std::map<std::string, ColumnBinning> binning;  // per covariate column
  char delimiter{','};
  bool has_header{true};
  std::int64_t population_size{0};  // 0: defaults to the number of records
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line,
                                           char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string location(const std::string& source, std::size_t line,
                            const std::string& column) {
  return source + ":" + std::to_string(line) + ", column '" + column + "'";
}

inline double parse_real(const std::string& token, const std::string& source,
                         std::size_t line, const std::string& column) {
  if (token.empty())
    throw ParseError("missing value at " + location(source, line, column));
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw ParseError("non-numeric value '" + token + "' at " +
                     location(source, line, column));
  return v;
}

inline int parse_binary(const std::string& token, const std::string& source,
                        std::size_t line, const std::string& column) {
  if (token == "0") return 0;
  if (token == "1") return 1;
  if (token.empty())
    throw ParseError("missing value at " + location(source, line, column));
  throw ParseError("non-binary value '" + token + "' at " +
                   location(source, line, column));
}

}  // namespace detail

inline ObservedSample ingest(std::istream& in, const DatasetSchema& schema,
                             const std::string& source = "<input>") {
  std::vector<std::string> wanted;
  wanted.push_back(schema.treatment);
  wanted.push_back(schema.outcome);
  if (schema.takeup) wanted.push_back(*schema.takeup);
  for (const auto& c : schema.covariates) wanted.push_back(c);

  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col_index;
  if (schema.has_header) {
    if (!std::getline(in, line))
      throw ParseError(source + ": empty input (missing header)");
    ++line_no;
    const auto headers = detail::split_line(line, schema.delimiter);
    for (std::size_t i = 0; i < headers.size(); ++i)
      col_index.emplace(headers[i], i);
  }
  auto resolve = [&](const std::string& name) -> std::size_t {
    if (schema.has_header) {
      auto it = col_index.find(name);
      if (it == col_index.end())
        throw ParseError(source + ": column '" + name + "' not found in header");
      return it->second;
    }
    try {
      const long idx = std::stol(name);
      if (idx < 1) throw std::invalid_argument("");
      return static_cast<std::size_t>(idx - 1);
    } catch (...) {
      throw ParseError(source +
                       ": without a header, columns are addressed by 1-based "
                       "index; got '" +
                       name + "'");
    }
  };
  std::vector<std::size_t> idx;
  idx.reserve(wanted.size());
  for (const auto& name : wanted) idx.push_back(resolve(name));

  ObservedSample s;
  std::vector<std::vector<std::string>> cov_raw(schema.covariates.size());
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line, schema.delimiter);
    for (std::size_t c = 0; c < wanted.size(); ++c)
      if (idx[c] >= fields.size())
        throw ParseError("row at " + source + ":" + std::to_string(line_no) +
                         " has no column '" + wanted[c] + "'");
    std::size_t c = 0;
    s.t.push_back(static_cast<std::uint8_t>(detail::parse_binary(
        fields[idx[c]], source, line_no, wanted[c])));
    ++c;
    s.y.push_back(detail::parse_real(fields[idx[c]], source, line_no, wanted[c]));
    ++c;
    if (schema.takeup) {
      if (!s.d) s.d.emplace();
      s.d->push_back(static_cast<std::uint8_t>(detail::parse_binary(
          fields[idx[c]], source, line_no, wanted[c])));
      ++c;
    }
    for (std::size_t j = 0; j < schema.covariates.size(); ++j, ++c) {
      if (fields[idx[c]].empty())
        throw ParseError("missing value at " +
                         detail::location(source, line_no, wanted[c]));
      cov_raw[j].push_back(fields[idx[c]]);
    }
    row_lines.push_back(line_no);
  }
  if (s.t.empty()) throw ParseError(source + ": no data rows");

  // per-column stratum labels: raw strings, or bin groups for numeric columns
  std::vector<std::vector<std::string>> cov_labels(schema.covariates.size());
  for (std::size_t j = 0; j < schema.covariates.size(); ++j) {
    const auto& name = schema.covariates[j];
    auto bin = schema.binning.find(name);
    if (bin == schema.binning.end()) {
      cov_labels[j] = cov_raw[j];
      continue;
    }
    std::vector<double> values;
    values.reserve(cov_raw[j].size());
    for (std::size_t r = 0; r < cov_raw[j].size(); ++r)
      values.push_back(
          detail::parse_real(cov_raw[j][r], source, row_lines[r], name));
    std::vector<int> groups;
    try {
      groups = bin->second.scheme == BinScheme::kFixedEdges
                   ? stratify_fixed_edges(values, bin->second.edges)
                   : stratify_quantile(values, bin->second.bins);
    } catch (const DomainError& e) {
      throw ParseError(source + ": binning of column '" + name +
                       "' failed: " + e.what());
    }
    cov_labels[j].reserve(groups.size());
    for (int g : groups) cov_labels[j].push_back("g" + std::to_string(g));
  }

  // cross-classify into one combined key per record
  std::vector<std::string> combined(s.t.size());
  for (std::size_t r = 0; r < s.t.size(); ++r) {
    if (schema.covariates.empty()) {
      combined[r] = "all";
      continue;
    }
    std::string key;
    for (std::size_t j = 0; j < cov_labels.size(); ++j) {
      if (j > 0) key.push_back('|');
      key += cov_labels[j][r];
    }
    combined[r] = std::move(key);
  }
  std::map<std::string, int> key_index;
  s.w.reserve(combined.size());
  for (const auto& key : combined) {
    auto [it, inserted] =
        key_index.emplace(key, static_cast<int>(s.stratum_labels.size()));
    if (inserted) s.stratum_labels.push_back(key);
    s.w.push_back(it->second);
  }
  s.population_size = schema.population_size > 0
                          ? schema.population_size
                          : static_cast<std::int64_t>(s.t.size());
  s.validate();
  return s;
}

inline ObservedSample ingest_file(const std::string& path,
                                  const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file '" + path + "'");
  return ingest(in, schema, path);
}

// Canonical CSV form: header t,y[,d],w with outcomes at full precision.
// ingest() of this output reproduces the sample exactly.
inline void emit_csv(const ObservedSample& s, std::ostream& out) {
  out << "t,y," << (s.d ? "d," : "") << "w\n";
  char buf[64];
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s.y[i]);
    out << int(s.t[i]) << ',' << buf << ',';
    if (s.d) out << int((*s.d)[i]) << ',';
    out << s.stratum_labels[static_cast<std::size_t>(s.w[i])] << '\n';
  }
}

// Merge strata that cannot support the requested analysis into their
// canonically previous neighbor (next, for the first stratum) until the
// design is workable. Opt-in behavior behind a CLI flag; each merge is
// reported. late_mode additionally requires nondegenerate lambdas.
inline ObservedSample merge_sparse_strata(ObservedSample s, bool late_mode,
                                          std::vector<std::string>* merges) {
  auto offending = [&](const ObservedSample& cur) -> int {
    const int num_k = cur.num_strata();
    std::vector<std::int64_t> in_t(static_cast<std::size_t>(num_k), 0);
    std::vector<std::int64_t> in_c(static_cast<std::size_t>(num_k), 0);
    for (std::size_t i = 0; i < cur.t.size(); ++i)
      ++(cur.t[i] == 1 ? in_t : in_c)[static_cast<std::size_t>(cur.w[i])];
    for (int k = 0; k < num_k; ++k)
      if (in_t[static_cast<std::size_t>(k)] == 0 ||
          in_c[static_cast<std::size_t>(k)] == 0)
        return k;
    if (late_mode && cur.d) {
      for (int k = 0; k < num_k; ++k) {
        const auto [l1, l0] = lambda_hats(cur, k);
        if (std::fabs(l1.to_double()) < kDefaultEpsLambda ||
            std::fabs(l0.to_double()) < kDefaultEpsLambda)
          return k;
      }
    }
    return -1;
  };
  for (int k = offending(s); k >= 0 && s.num_strata() > 1; k = offending(s)) {
    const int into = k > 0 ? k - 1 : 1;
    const std::string from_label = s.stratum_labels[static_cast<std::size_t>(k)];
    const std::string into_label =
        s.stratum_labels[static_cast<std::size_t>(into)];
    if (merges)
      merges->push_back("merged stratum '" + from_label + "' into '" +
                        into_label + "'");
    std::vector<std::string> labels;
    labels.reserve(s.t.size());
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      int w = s.w[i];
      if (w == k) w = into;
      labels.push_back(s.stratum_labels[static_cast<std::size_t>(w)]);
    }
    std::map<std::string, int> key_index;
    s.stratum_labels.clear();
    s.w.clear();
    for (const auto& key : labels) {
      auto [it, inserted] =
          key_index.emplace(key, static_cast<int>(s.stratum_labels.size()));
      if (inserted) s.stratum_labels.push_back(key);
      s.w.push_back(it->second);
    }
  }
  return s;
}

}  // namespace sharpvar

#endif  // SHARPVAR_IO_HPP
