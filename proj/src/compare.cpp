// Copyright 2026 The specprec Authors.
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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "specprec/scenario.hpp"

namespace specprec {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Run {
  std::string label;
  json config;
  std::vector<std::string> keys;
  std::vector<std::string> values;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

Run load_run(const std::string& dir) {
  Run r;
  const fs::path d(dir);
  try {
    r.config = json::parse(slurp(d / "manifest.json")).at("config");
  } catch (const json::exception& e) {
    throw IoError(dir + "/manifest.json: " + e.what());
  }
  std::istringstream summary(slurp(d / "summary.csv"));
  std::string header, row;
  if (!std::getline(summary, header) || !std::getline(summary, row))
    throw IoError(dir + "/summary.csv: expected a header and one row");
  r.keys = split(header);
  r.values = split(row);
  if (r.keys.size() != r.values.size())
    throw IoError(dir + "/summary.csv: ragged row");
  r.label = r.values.empty() ? dir : r.values[0];
  return r;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double to_double(const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    return used == s.size() ? v : std::nan("");
  } catch (...) {
    return std::nan("");
  }
}

}  // namespace

std::string compare_runs(const std::vector<std::string>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("compare: no runs given");
  std::vector<Run> runs;
  for (const auto& d : run_dirs) runs.push_back(load_run(d));

  const Run& base = runs.front();
  for (size_t i = 1; i < runs.size(); ++i) {
    for (const char* key : {"numerology", "frequency_points_hz", "seed",
                            "symbols", "antennas", "constellation"}) {
      if (runs[i].config.value(key, json()) != base.config.value(key, json()))
        throw ConfigError("compare: " + run_dirs[i] + " differs from " +
                          run_dirs[0] + " in '" + key + "'");
    }
    if (runs[i].keys != base.keys)
      throw ConfigError("compare: summary columns differ between " +
                        run_dirs[0] + " and " + run_dirs[i]);
  }

  // Labels must be unique column names.
  std::vector<std::string> labels;
  for (size_t i = 0; i < runs.size(); ++i) {
    std::string l = runs[i].label;
    int dup = 0;
    for (size_t j = 0; j < i; ++j)
      if (runs[j].label == runs[i].label) ++dup;
    if (dup > 0) l += "_" + std::to_string(dup + 1);
    labels.push_back(l);
  }

  std::ostringstream os;
  os << "metric";
  for (const auto& l : labels) os << ',' << l;
  for (size_t i = 1; i < labels.size(); ++i)
    os << ",delta_" << labels[i] << "_vs_" << labels[0];
  os << '\n';
  for (size_t k = 1; k < base.keys.size(); ++k) {
    os << base.keys[k];
    for (const auto& r : runs) os << ',' << r.values[k];
    const double b = to_double(base.values[k]);
    for (size_t i = 1; i < runs.size(); ++i)
      os << ',' << fmt(to_double(runs[i].values[k]) - b);
    os << '\n';
  }
  return os.str();
}

}  // namespace specprec
