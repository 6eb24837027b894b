// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the text readers and writers.

#pragma once

#include "tulip/core_model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace tulip::text {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline double to_double(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw ParseError("malformed number '" + tok + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("malformed number '" + tok + "'", line);
  }
}

inline int to_int(const std::string& tok, int line) {
  const double v = to_double(tok, line);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  return static_cast<int>(v);
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace tulip::text
