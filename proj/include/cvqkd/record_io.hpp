// Copyright 2026 The cvqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cvqkd/observation.hpp"

namespace cvqkd {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes a homodyne record as CSV with header `x,basis,y` (x in {0,1},
/// basis in {q,p}, y in full double precision, LF line endings).
inline void write_record_csv(std::ostream& out, const HomodyneRecord& record) {
  out << "x,basis,y\n";
  char buf[40];
  for (const RecordEntry& e : record.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.y);
    out << static_cast<int>(e.x) << ','
        << (e.basis == Basis::q ? 'q' : 'p') << ',' << buf << '\n';
  }
}

inline HomodyneRecord read_record_csv(std::istream& in) {
  HomodyneRecord record;
  std::string line;
  long line_no = 0;

  auto fail = [&](const std::string& what) {
    throw ParseError("record CSV line " + std::to_string(line_no) + ": " +
                     what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line_no == 1) {
      if (line != "x,basis,y") {
        fail("expected header 'x,basis,y'");
      }
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail("expected three comma-separated fields");
    }
    const std::string xs = line.substr(0, c1);
    const std::string bs = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string ys = line.substr(c2 + 1);

    RecordEntry e{};
    if (xs == "0") {
      e.x = 0;
    } else if (xs == "1") {
      e.x = 1;
    } else {
      fail("bit must be 0 or 1, got '" + xs + "'");
    }
    if (bs == "q") {
      e.basis = Basis::q;
    } else if (bs == "p") {
      e.basis = Basis::p;
    } else {
      fail("basis must be q or p, got '" + bs + "'");
    }
    try {
      std::size_t consumed = 0;
      e.y = std::stod(ys, &consumed);
      if (consumed != ys.size()) {
        fail("trailing characters after outcome '" + ys + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      fail("outcome is not a number: '" + ys + "'");
    }
    record.entries.push_back(e);
  }
  if (line_no == 0) {
    throw ParseError("record CSV is empty");
  }
  return record;
}

inline nlohmann::json stats_to_json(const ObservedStatistics& s) {
  return nlohmann::json{
      {"mean_q", {s.mean_q[0], s.mean_q[1]}},
      {"mean_p", {s.mean_p[0], s.mean_p[1]}},
      {"var_q", {s.var_q[0], s.var_q[1]}},
      {"var_p", {s.var_p[0], s.var_p[1]}},
      {"n", {{s.n[0][0], s.n[0][1]}, {s.n[1][0], s.n[1][1]}}},
  };
}

inline ObservedStatistics stats_from_json(const nlohmann::json& j) {
  ObservedStatistics s;
  try {
    for (int x = 0; x < 2; ++x) {
      s.mean_q[x] = j.at("mean_q").at(x).get<double>();
      s.mean_p[x] = j.at("mean_p").at(x).get<double>();
      s.var_q[x] = j.at("var_q").at(x).get<double>();
      s.var_p[x] = j.at("var_p").at(x).get<double>();
      if (j.contains("n")) {
        for (int b = 0; b < 2; ++b) {
          s.n[x][b] = j.at("n").at(x).at(b).get<std::int64_t>();
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("statistics JSON: ") + e.what());
  }
  for (int x = 0; x < 2; ++x) {
    if (!(s.var_q[x] > 0.0) || !(s.var_p[x] > 0.0)) {
      throw ParseError("statistics JSON: variances must be positive");
    }
  }
  return s;
}

}  // namespace cvqkd
