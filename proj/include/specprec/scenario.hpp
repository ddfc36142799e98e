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

// Batch experiment driver: config parsing, the per-symbol pipeline and the
// files it leaves behind.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specprec/constrained.hpp"
#include "specprec/metrics.hpp"
#include "specprec/oracle.hpp"
#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"
#include "specprec/unconstrained.hpp"

namespace specprec {

enum class Precoder { kNone, kNsp, kEnsp, kAdmm, kSsp, kEadmm, kEssp, kOracle };

Precoder parse_precoder(const std::string& name);
std::string precoder_name(Precoder p);

// Per-subcarrier EVM budget layout. Either `prb` lists one entry per active
// PRB, or `edges` lists entries from the band edge inwards (mirrored on the
// upper edge) with `interior` filling the rest. Each entry is a flat value or
// a ramp with one value per subcarrier, band edge first.
struct EvmProfile {
  struct Entry {
    std::vector<double> values;  // size 1 (flat) or prb_size (ramp)
  };
  std::vector<Entry> prb;
  std::vector<Entry> edges;
  double interior = -1.0;  // < 0: unset
};

// Budgets in active_set order. Throws ConfigError on coverage gaps.
std::vector<double> expand_evm_profile(const EvmProfile& profile,
                                       const OfdmNumerology& num);

// Root-mean-square budget over the active subcarriers, which is the EVM of a
// grid with equal column powers that meets every budget with equality.
double pooled_evm_budget(const std::vector<double>& eps);

struct AclrSpec {
  double bandwidth_hz = 4.5e6;
  double spacing_hz = 5e6;
  double center_hz = 0.0;
  bool center_from_active = true;  // center on the middle of the active block
};

struct ScenarioConfig {
  OfdmNumerology numerology;
  int active_first = 0;
  int active_count = 0;
  std::vector<double> freq_points_hz;
  std::vector<double> mask_db;  // per point
  std::vector<std::vector<double>> mask_db_per_antenna;  // optional override
  double reference_db = -21.5;  // in-band density, dB per 100 kHz

  Precoder precoder = Precoder::kNone;
  AdmmConfig admm;
  SspConfig ssp;
  EsspConfig essp;
  OracleConfig oracle;

  EvmConstraint evm;
  bool evm_from_profile = false;
  EvmProfile evm_profile;

  int antennas = 1;
  Constellation constellation = Constellation::kQam64;
  std::uint64_t seed = 1;
  int symbols = 100;
  int psd_oversample = 4;
  AclrSpec aclr;

  std::string out_dir = "out";
  bool emit_waveforms = false;
  int threads = 0;  // 0: hardware concurrency

  // Throws ConfigError naming the offending field.
  void validate() const;
  double aclr_center_hz() const;
};

// Parses the JSON config. Field names carry their unit (_hz, _db, _fraction).
ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
// Echo with every default filled in; parse_scenario_json accepts it back.
std::string scenario_to_json(const ScenarioConfig& cfg);

// Raised when a solver fails on one symbol.
class SymbolError : public Error {
 public:
  SymbolError(long long symbol, const std::string& what)
      : Error("symbol " + std::to_string(symbol) + ": " + what),
        symbol_(symbol) {}
  long long symbol() const { return symbol_; }

 private:
  long long symbol_;
};

struct RunSummary {
  AclrResult aclr;
  double evm_pooled = 0.0;      // over all symbols, antennas, subcarriers
  double evm_max_symbol = 0.0;  // worst per-symbol wideband EVM
  double evm_budget_excess_max = 0.0;  // worst relative overshoot, <= 0 ok
  double mask_ratio_max = 0.0;
  std::vector<double> oobe_db;  // 10 log10 mean |a_m^T x|^2 per point
  double mean_iterations = 0.0;
  long long early_stops = 0;
  double inband_density_db = 0.0;
};

struct ManifestFile {
  std::string name;
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string config_json;
  std::string version;
  std::vector<std::pair<std::string, double>> timings_s;
  std::vector<ManifestFile> files;
  RunSummary summary;
  PsdEstimate psd;
};

RunManifest run_scenario(const ScenarioConfig& cfg);

std::string sha256_file(const std::string& path);

// Side-by-side summaries of finished runs. The first directory is the
// baseline for the delta columns. Throws ConfigError when the runs differ
// in numerology, points, seed or symbol count.
std::string compare_runs(const std::vector<std::string>& run_dirs);

}  // namespace specprec
