#pragma once

// JSON file formats.
//   matrix:   {"d": 2, "rows": [[2, 0], [0, 2]]}
//   sequence: {"coeffs": [{"j": 0, "k": [0, 0], "v": 1.5}, ...]}
//             "v" may also be [re, im]; the modulus is stored.
// Windows on the command line are "lo0,hi0;lo1,hi1", one range per axis.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adl/errors.hpp"
#include "adl/geometry.hpp"
#include "adl/linalg.hpp"
#include "adl/sequences.hpp"

namespace adl {

using Json = nlohmann::json;

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

inline Matrix matrix_from_json(const Json& j, const std::string& where = "matrix") {
  try {
    const auto& rows = j.at("rows");
    if (!rows.is_array() || rows.empty()) fail(ErrorKind::ParseError, where + ": \"rows\" must be a non-empty array");
    const std::size_t d = rows.size();
    if (j.contains("d") && j.at("d").get<std::size_t>() != d)
      fail(ErrorKind::ParseError, where + ": \"d\" does not match the number of rows");
    std::vector<double> data;
    data.reserve(d * d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& r = rows[i];
      if (!r.is_array() || r.size() != d)
        fail(ErrorKind::ParseError, where + ": row " + std::to_string(i) + " must have " + std::to_string(d) + " entries");
      for (const auto& v : r) {
        if (!v.is_number()) fail(ErrorKind::ParseError, where + ": row " + std::to_string(i) + " has a non-number");
        data.push_back(v.get<double>());
      }
    }
    return Matrix(d, std::move(data));
  } catch (const Json::exception& e) {
    fail(ErrorKind::ParseError, where + ": " + e.what());
  }
}

inline Matrix read_matrix(const std::string& path) { return matrix_from_json(read_json_file(path), path); }

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return {{"d", m.dim()}, {"rows", rows}};
}

inline SparseSequence sequence_from_json(const Json& j, const std::string& where = "sequence") {
  try {
    const auto& coeffs = j.at("coeffs");
    if (!coeffs.is_array()) fail(ErrorKind::ParseError, where + ": \"coeffs\" must be an array");
    std::size_t d = j.contains("d") ? j.at("d").get<std::size_t>() : 0;
    if (d == 0 && !coeffs.empty()) d = coeffs[0].at("k").size();
    SparseSequence c(d);
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
      const auto& e = coeffs[n];
      const std::string at = where + ": coeffs[" + std::to_string(n) + "]";
      auto k = e.at("k").get<IntVec>();
      if (k.size() != d) fail(ErrorKind::ParseError, at + ": \"k\" has the wrong dimension");
      const auto jj = e.at("j").get<std::int64_t>();
      const auto& v = e.at("v");
      if (v.is_array()) {
        if (v.size() != 2) fail(ErrorKind::ParseError, at + ": complex \"v\" must be [re, im]");
        c.set_complex(jj, k, v[0].get<double>(), v[1].get<double>());
      } else {
        c.set(jj, k, v.get<double>());
      }
    }
    return c;
  } catch (const Json::exception& e) {
    fail(ErrorKind::ParseError, where + ": " + e.what());
  }
}

inline SparseSequence read_sequence(const std::string& path) { return sequence_from_json(read_json_file(path), path); }

inline Json sequence_to_json(const SparseSequence& c) {
  Json coeffs = Json::array();
  c.for_each([&](std::int64_t j, const IntVec& k, double v) { coeffs.push_back({{"j", j}, {"k", k}, {"v", v}}); });
  return {{"d", c.dim()}, {"coeffs", coeffs}};
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError, what + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::ParseError, what + ": empty list");
  return out;
}

inline std::vector<std::pair<double, double>> parse_ranges(const std::string& s, const std::string& what) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(s);
  std::string axis;
  while (std::getline(ss, axis, ';')) {
    auto r = parse_list(axis, what);
    if (r.size() != 2) fail(ErrorKind::ParseError, what + ": each axis needs 'lo,hi', got '" + axis + "'");
    out.emplace_back(r[0], r[1]);
  }
  if (out.empty()) fail(ErrorKind::ParseError, what + ": no ranges in '" + s + "'");
  return out;
}

/// "lo0,hi0;lo1,hi1;..." as a box with one [lo, hi) range per axis.
inline Box parse_window(const std::string& s) {
  Box b;
  for (auto [lo, hi] : parse_ranges(s, "window")) {
    b.lo.push_back(lo);
    b.hi.push_back(hi);
  }
  if (b.empty()) fail(ErrorKind::ParseError, "window '" + s + "' is empty");
  return b;
}

/// Integer index box with inclusive bounds, same syntax as parse_window.
inline std::pair<IntVec, IntVec> parse_index_window(const std::string& s) {
  IntVec lo, hi;
  for (auto [l, h] : parse_ranges(s, "index window")) {
    if (l != std::floor(l) || h != std::floor(h) || l > h)
      fail(ErrorKind::ParseError, "index window '" + s + "' needs integer bounds with lo <= hi");
    lo.push_back(static_cast<std::int64_t>(l));
    hi.push_back(static_cast<std::int64_t>(h));
  }
  return {lo, hi};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::ParseError, path + ": cannot open for writing");
  out << text;
  if (!out) fail(ErrorKind::ParseError, path + ": write failed");
}

}  // namespace adl
