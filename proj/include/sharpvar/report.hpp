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

#ifndef SHARPVAR_REPORT_HPP
#define SHARPVAR_REPORT_HPP

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

namespace sharpvar {

// Report documents are built as insertion-ordered JSON so that the field set
// and field order depend only on the command and flags, never on the data.
using Doc = nlohmann::ordered_json;

inline std::string format_double(double x, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig_digits, x);
  return buf;
}

namespace detail {

inline void write_json_string(std::ostream& out, const std::string& s) {
  out << '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out << "\\\"";
        break;
      case '\\':
        out << "\\\\";
        break;
      case '\n':
        out << "\\n";
        break;
      case '\t':
        out << "\\t";
        break;
      case '\r':
        out << "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out << buf;
        } else {
          out << c;
        }
    }
  }
  out << '"';
}

inline void write_json_value(std::ostream& out, const Doc& v, int sig_digits,
                             int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case Doc::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      std::size_t i = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++i) {
        out << pad;
        write_json_string(out, it.key());
        out << ": ";
        write_json_value(out, it.value(), sig_digits, indent, depth + 1);
        if (i + 1 < v.size()) out << ',';
        out << '\n';
      }
      out << close_pad << '}';
      return;
    }
    case Doc::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out << pad;
        write_json_value(out, v[i], sig_digits, indent, depth + 1);
        if (i + 1 < v.size()) out << ',';
        out << '\n';
      }
      out << close_pad << ']';
      return;
    }
    case Doc::value_t::string:
      write_json_string(out, v.get_ref<const std::string&>());
      return;
    case Doc::value_t::boolean:
      out << (v.get<bool>() ? "true" : "false");
      return;
    case Doc::value_t::number_integer:
      out << v.get<std::int64_t>();
      return;
    case Doc::value_t::number_unsigned:
      out << v.get<std::uint64_t>();
      return;
    case Doc::value_t::number_float: {
      const double x = v.get<double>();
      if (std::isfinite(x))
        out << format_double(x, sig_digits);
      else
        out << "null";
      return;
    }
    default:
      out << "null";
  }
}

inline void flatten(const Doc& v, const std::string& prefix,
                    std::ostream& out, char delim, int sig_digits) {
  auto join = [&](const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  };
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it)
      flatten(it.value(), join(it.key()), out, delim, sig_digits);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i)
      flatten(v[i], prefix + "[" + std::to_string(i) + "]", out, delim,
              sig_digits);
  } else {
    out << prefix << delim;
    if (v.is_string())
      out << v.get_ref<const std::string&>();
    else if (v.is_boolean())
      out << (v.get<bool>() ? "true" : "false");
    else if (v.is_number_integer())
      out << v.get<std::int64_t>();
    else if (v.is_number_unsigned())
      out << v.get<std::uint64_t>();
    else if (v.is_number_float())
      out << format_double(v.get<double>(), sig_digits);
    else
      out << "";
    out << '\n';
  }
}

}  // namespace detail

// JSON with a fixed number of significant digits (17 round-trips doubles).
inline void write_json(std::ostream& out, const Doc& doc, int sig_digits = 17) {
  detail::write_json_value(out, doc, sig_digits, 2, 0);
  out << '\n';
}

// Flat key/value table (CSV or TSV) of the same document.
inline void write_flat(std::ostream& out, const Doc& doc, char delim,
                       int sig_digits = 6) {
  out << "key" << delim << "value\n";
  detail::flatten(doc, "", out, delim, sig_digits);
}

}  // namespace sharpvar

#endif  // SHARPVAR_REPORT_HPP
