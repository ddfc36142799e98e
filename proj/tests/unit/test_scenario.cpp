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


#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "specprec/scenario.hpp"

using namespace specprec;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// 128-point FFT, 48 active subcarriers, points just outside the block.
json small_config() {
  return json::parse(R"({
    "numerology": {"fft_size": 128, "cp_len_samples": 9,
                   "subcarrier_spacing_hz": 15000,
                   "active_first_subcarrier": -24, "active_count": 48,
                   "prb_size": 12},
    "frequency_points_hz": [-420000, -390000, 390000, 420000],
    "mask": {"levels_db_per_100khz": [-65, -60, -60, -65]},
    "precoder": "ssp",
    "symbols": 24,
    "seed": 77,
    "antennas": 1,
    "aclr": {"bandwidth_hz": 360000, "spacing_hz": 400000,
             "center_hz": "active"},
    "output": {"directory": "unused", "emit_waveforms": true}
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("specprec_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const json& j) {
  try {
    parse_scenario_json(j.dump()).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("flat per-PRB profile") {
  const auto num = OfdmNumerology::contiguous(128, 9, 15e3, -24, 48, 12);
  EvmProfile p;
  p.prb = {{{0.1}}, {{0.05}}, {{0.06}}, {{0.2}}};
  const auto eps = expand_evm_profile(p, num);
  REQUIRE(eps.size() == 48);
  CHECK(eps[0] == 0.1);
  CHECK(eps[11] == 0.1);
  CHECK(eps[12] == 0.05);
  CHECK(eps[47] == 0.2);
  p.prb.pop_back();
  CHECK_THROWS_AS(expand_evm_profile(p, num), ConfigError);
}

TEST_CASE("edge ramps mirror on the upper edge") {
  const auto num = OfdmNumerology::contiguous(128, 9, 15e3, -24, 48, 12);
  EvmProfile p;
  EvmProfile::Entry ramp;
  for (int i = 0; i < 12; ++i) ramp.values.push_back(0.2 - 0.01 * i);
  p.edges = {ramp};
  p.interior = 0.07;
  const auto eps = expand_evm_profile(p, num);
  for (int i = 0; i < 12; ++i) {
    CHECK(eps[i] == ramp.values[i]);
    CHECK(eps[47 - i] == ramp.values[i]);
  }
  for (int i = 12; i < 36; ++i) CHECK(eps[i] == 0.07);
  CHECK(pooled_evm_budget({0.1, 0.1, 0.1}) == doctest::Approx(0.1));
  CHECK(pooled_evm_budget({0.3, 0.4}) == doctest::Approx(std::sqrt(0.125)));
}

TEST_CASE("profile coverage gaps and bad ramps are rejected") {
  const auto num = OfdmNumerology::contiguous(128, 9, 15e3, -24, 48, 12);
  EvmProfile p;
  p.edges = {{{0.1}}};
  CHECK_THROWS_AS(expand_evm_profile(p, num), ConfigError);
  p.interior = 0.07;
  p.edges = {{{0.1, 0.2, 0.3}}};
  CHECK_THROWS_AS(expand_evm_profile(p, num), ConfigError);
  p.edges = {{{-0.1}}};
  CHECK_THROWS_AS(expand_evm_profile(p, num), ConfigError);
}

TEST_CASE("config errors name the field") {
  json j = small_config();
  CHECK(config_error(j).empty());

  j = small_config();
  j["numerology"]["fft_sise"] = 128;
  CHECK(config_error(j).find("numerology.fft_sise: unknown field") == 0);

  j = small_config();
  j["numerology"].erase("cp_len_samples");
  CHECK(config_error(j).find("numerology.cp_len_samples") == 0);

  j = small_config();
  j["mask"]["levels_db_per_100khz"] = {-65, -60};
  CHECK(config_error(j).find("mask.levels_db_per_100khz") == 0);

  j = small_config();
  j["admm"] = {{"rho", "ten"}};
  CHECK(config_error(j).find("admm.rho: expected a number") == 0);

  j = small_config();
  j["precoder"] = "magic";
  CHECK(config_error(j).find("precoder") == 0);

  j = small_config();
  j["evm"] = {{"mode", "frequency_selective"},
              {"profile", {{"edges_fraction", {0.1}}}}};
  CHECK(config_error(j).find("evm.profile") == 0);

  j = small_config();
  j["aclr"]["spacing_hz"] = 5e6;
  CHECK(config_error(j).find("aclr") == 0);

  CHECK_THROWS_AS(parse_scenario_json("{not json"), ConfigError);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/specprec.json"), Error);
}

TEST_CASE("config echo parses back to the same config") {
  json j = small_config();
  j["evm"] = {{"mode", "frequency_selective"},
              {"profile", {{"edges_fraction", {json::array({0.2, 0.2, 0.19, 0.19,
                                                            0.16, 0.15, 0.14, 0.13,
                                                            0.125, 0.125, 0.125, 0.125})}},
                           {"interior_fraction", 0.07}}}};
  const ScenarioConfig a = parse_scenario_json(j.dump());
  const std::string echo = scenario_to_json(a);
  CHECK(scenario_to_json(parse_scenario_json(echo)) == echo);
}

TEST_CASE("runs are deterministic across thread counts") {
  ScenarioConfig cfg = parse_scenario_json(small_config().dump());
  const fs::path a = scratch("t1"), b = scratch("t4");
  cfg.out_dir = a.string();
  cfg.threads = 1;
  const RunManifest ma = run_scenario(cfg);
  cfg.out_dir = b.string();
  cfg.threads = 4;
  const RunManifest mb = run_scenario(cfg);

  for (const char* f : {"trace.csv", "evm_subcarrier.csv", "psd.csv",
                        "summary.csv", "waveform.bin", "grid.bin"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(sha256_file((a / f).string()) == sha256_file((b / f).string()));
  }
  bool listed = false;
  for (const auto& f : ma.files)
    if (f.name == "psd.csv") {
      listed = true;
      CHECK(f.sha256 == sha256_file((a / "psd.csv").string()));
      CHECK(f.bytes == fs::file_size(a / "psd.csv"));
    }
  CHECK(listed);
  CHECK(ma.summary.evm_pooled == mb.summary.evm_pooled);
  CHECK(ma.summary.mask_ratio_max == mb.summary.mask_ratio_max);

  // Comparing a run with itself gives zero deltas.
  const std::string csv = compare_runs({a.string(), b.string()});
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("metric,ssp,ssp_2,delta_ssp_2_vs_ssp", 0) == 0);
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.rfind("precoder", 0) == 0) continue;
    ++rows;
    const std::string delta = line.substr(line.rfind(',') + 1);
    CHECK_MESSAGE((delta == "0" || delta == "nan"), line);
  }
  CHECK(rows > 5);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("compare refuses mismatched runs") {
  ScenarioConfig cfg = parse_scenario_json(small_config().dump());
  cfg.emit_waveforms = false;
  const fs::path a = scratch("ca"), b = scratch("cb");
  cfg.out_dir = a.string();
  run_scenario(cfg);
  cfg.out_dir = b.string();
  cfg.seed = 78;
  run_scenario(cfg);
  CHECK_THROWS_AS(compare_runs({a.string(), b.string()}), ConfigError);
  CHECK_THROWS_AS(compare_runs({a.string(), "/nonexistent"}), IoError);
  CHECK_THROWS_AS(compare_runs({}), ConfigError);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("no precoding leaves the grid untouched") {
  ScenarioConfig cfg = parse_scenario_json(small_config().dump());
  cfg.precoder = Precoder::kNone;
  cfg.emit_waveforms = false;
  const fs::path a = scratch("none");
  cfg.out_dir = a.string();
  const RunManifest m = run_scenario(cfg);
  CHECK(m.summary.evm_pooled == 0.0);
  CHECK(m.summary.evm_max_symbol == 0.0);
  CHECK(m.summary.mean_iterations == 0.0);
  CHECK(m.summary.oobe_db.size() == 4);
  fs::remove_all(a);
}

TEST_CASE("every precoder runs on the small scenario") {
  for (const char* name :
       {"nsp", "ensp", "admm", "ssp", "eadmm", "essp", "oracle"}) {
    CAPTURE(name);
    ScenarioConfig cfg = parse_scenario_json(small_config().dump());
    cfg.precoder = parse_precoder(name);
    CHECK(precoder_name(cfg.precoder) == name);
    cfg.symbols = 4;
    cfg.antennas = 2;
    cfg.emit_waveforms = false;
    const fs::path a = scratch(name);
    cfg.out_dir = a.string();
    const RunManifest m = run_scenario(cfg);
    CHECK(m.summary.evm_pooled >= 0.0);
    CHECK(m.summary.mask_ratio_max >= 0.0);
    fs::remove_all(a);
  }
  CHECK_THROWS_AS(parse_precoder("zf"), ConfigError);
}
