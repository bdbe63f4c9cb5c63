// Copyright 2026 the xreid developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xreid/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "xreid/error.hpp"

namespace xreid {

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line,
                             const std::string& what) {
  Raise(ErrorCode::kParse,
        path + ":" + std::to_string(line) + ": " + what);
}

// Splits on runs of spaces/tabs. Carriage returns are stripped so files
// written on Windows still load.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int64_t parse_int(const std::string& s, const std::string& path, long line,
                  const char* what) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    parse_fail(path, line, std::string("bad ") + what + " '" + s + "'");
  }
  return value;
}

double parse_double(const std::string& s, const std::string& path, long line,
                    const char* what) {
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE) {
    parse_fail(path, line, std::string("bad ") + what + " '" + s + "'");
  }
  if (!std::isfinite(value)) {
    parse_fail(path, line, std::string("non-finite ") + what + " '" + s + "'");
  }
  return value;
}

}  // namespace

Dataset load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) Raise(ErrorCode::kIo, "cannot open '" + path + "' for reading");

  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file, expected header");
  ++line_no;
  auto header = split_fields(line);
  if (header.size() != 3 || header[0] != "REIDFEAT" || header[1] != "1" ||
      header[2].rfind("F=", 0) != 0) {
    parse_fail(path, line_no, "bad header, expected 'REIDFEAT 1 F=<int>'");
  }
  const int64_t feature_dim =
      parse_int(header[2].substr(2), path, line_no, "feature dimension");
  if (feature_dim <= 0) parse_fail(path, line_no, "feature dimension must be positive");

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    const size_t expected = 6 + static_cast<size_t>(feature_dim);
    if (fields.size() != expected) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(expected) + " fields, got " +
                     std::to_string(fields.size()));
    }
    Sample s;
    s.dataset_id = static_cast<int32_t>(
        parse_int(fields[0], path, line_no, "dataset_id"));
    s.camera_id = static_cast<int32_t>(
        parse_int(fields[1], path, line_no, "camera_id"));
    if (fields[2] == "-") {
      s.person_id = std::nullopt;
    } else {
      s.person_id = parse_int(fields[2], path, line_no, "person_id");
    }
    s.tracklet_id = parse_int(fields[3], path, line_no, "tracklet_id");
    s.time_start = parse_double(fields[4], path, line_no, "t_start");
    s.time_end = parse_double(fields[5], path, line_no, "t_end");
    s.features.resize(feature_dim);
    for (int64_t f = 0; f < feature_dim; ++f) {
      s.features[f] = parse_double(fields[6 + static_cast<size_t>(f)], path,
                                   line_no, "feature value");
    }
    samples.push_back(std::move(s));
  }
  if (in.bad()) Raise(ErrorCode::kIo, "read error on '" + path + "'");

  if (samples.empty()) return Dataset(static_cast<Index>(feature_dim));
  try {
    return Dataset(std::move(samples));
  } catch (const Error& e) {
    Raise(e.code(), path + ": " + e.what());
  }
}

void save_features(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) Raise(ErrorCode::kIo, "cannot open '" + path + "' for writing");

  const std::size_t n = ds.size();
  const Index dim = ds.feature_dim();
  char buf[64];
  std::string row;
  std::snprintf(buf, sizeof(buf), "REIDFEAT 1 F=%lld\n",
                static_cast<long long>(dim));
  out << buf;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    row += std::to_string(ds.dataset_id_of(i));
    row += ' ';
    row += std::to_string(ds.camera_id_of(i));
    row += ' ';
    const auto person = ds.person_of(i);
    row += person ? std::to_string(*person) : std::string("-");
    row += ' ';
    row += std::to_string(ds.tracklet_id_of(i));
    std::snprintf(buf, sizeof(buf), " %.17g %.17g", ds.time_start_of(i),
                  ds.time_end_of(i));
    row += buf;
    const auto& feats = ds.features();
    for (Index f = 0; f < dim; ++f) {
      std::snprintf(buf, sizeof(buf),
                    " %.17g", feats(static_cast<Index>(i), f));
      row += buf;
    }
    row += '\n';
    out << row;
  }
  out.flush();
  if (!out) Raise(ErrorCode::kIo, "write error on '" + path + "'");
}

}  // namespace xreid
