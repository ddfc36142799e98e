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

// specprec: run a precoding scenario, or compare finished runs.
//
//   specprec --config configs/mask1.json --precoder ssp --symbols 200
//   specprec compare out/ssp out/admm
//
// Exit codes: 0 success, 2 configuration error, 3 solver error, 1 anything
// else (I/O, usage).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specprec/specprec.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int exit_code(spp_status st) {
  switch (st) {
    case SPP_OK:
      return kExitOk;
    case SPP_ERR_CONFIG:
    case SPP_ERR_INVALID_ARGUMENT:
      return kExitConfig;
    case SPP_ERR_DIMENSION:
    case SPP_ERR_DEGENERATE:
    case SPP_ERR_SINGULAR:
    case SPP_ERR_ORACLE:
    case SPP_ERR_SOLVER:
      return kExitSolver;
    default:
      return kExitOther;
  }
}

int report(spp_status st) {
  std::fprintf(stderr, "specprec: %s: %s\n", spp_status_string(st),
               spp_last_error());
  return exit_code(st);
}

struct ScenarioHandle {
  spp_scenario* p = nullptr;
  ~ScenarioHandle() { spp_scenario_destroy(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral precoding experiments"};
  app.set_version_flag("--version", std::string(spp_version()));

  std::string config;
  std::string precoder;
  std::uint64_t seed = 0;
  int symbols = 0;
  std::string out_dir;
  bool emit = false;
  int threads = -1;
  app.add_option("--config", config, "Scenario JSON file")->check(
      CLI::ExistingFile);
  app.add_option("--precoder", precoder,
                 "none, nsp, ensp, admm, ssp, eadmm, essp or oracle");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--symbols", symbols, "OFDM symbols to simulate")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_flag("--emit-waveforms", emit, "Write waveform.bin and grid.bin");
  app.add_option("--threads", threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* cmp = app.add_subcommand("compare", "Compare finished runs");
  std::vector<std::string> runs;
  std::string cmp_out;
  cmp->add_option("runs", runs, "Run directories; the first is the baseline")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmp->add_option("-o,--output", cmp_out, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*cmp) {
    std::vector<const char*> dirs;
    for (const auto& r : runs) dirs.push_back(r.c_str());
    size_t needed = 0;
    spp_status st = spp_compare_runs(dirs.data(), static_cast<int>(dirs.size()),
                                     nullptr, 0, &needed);
    if (st != SPP_OK && needed == 0) return report(st);
    std::string buf(needed, '\0');
    st = spp_compare_runs(dirs.data(), static_cast<int>(dirs.size()),
                          buf.data(), buf.size(), &needed);
    if (st != SPP_OK) return report(st);
    buf.resize(needed - 1);
    if (cmp_out.empty()) {
      std::fputs(buf.c_str(), stdout);
    } else {
      std::FILE* f = std::fopen(cmp_out.c_str(), "wb");
      if (!f || std::fputs(buf.c_str(), f) < 0) {
        std::fprintf(stderr, "specprec: cannot write %s\n", cmp_out.c_str());
        if (f) std::fclose(f);
        return kExitOther;
      }
      std::fclose(f);
    }
    return kExitOk;
  }

  if (config.empty()) {
    std::fprintf(stderr, "specprec: --config is required\n");
    return kExitConfig;
  }

  ScenarioHandle s;
  spp_status st = spp_scenario_load(config.c_str(), &s.p);
  if (st != SPP_OK) return report(st);
  if (!precoder.empty() &&
      (st = spp_scenario_set_precoder(s.p, precoder.c_str())) != SPP_OK)
    return report(st);
  if (*seed_opt && (st = spp_scenario_set_seed(s.p, seed)) != SPP_OK)
    return report(st);
  if (symbols > 0 && (st = spp_scenario_set_symbols(s.p, symbols)) != SPP_OK)
    return report(st);
  if (!out_dir.empty() &&
      (st = spp_scenario_set_out_dir(s.p, out_dir.c_str())) != SPP_OK)
    return report(st);
  if (emit && (st = spp_scenario_set_emit_waveforms(s.p, 1)) != SPP_OK)
    return report(st);
  if (threads >= 0 && (st = spp_scenario_set_threads(s.p, threads)) != SPP_OK)
    return report(st);

  spp_run_summary sum{};
  if ((st = spp_scenario_run(s.p, &sum)) != SPP_OK) return report(st);
  std::printf(
      "aclr_worst_db=%.3f aclr_lower_db=%.3f aclr_upper_db=%.3f "
      "evm=%.5f mask_ratio_max=%.5f early_stops=%lld\n",
      sum.aclr_worst_db, sum.aclr_lower_db, sum.aclr_upper_db, sum.evm_pooled,
      sum.mask_ratio_max, sum.early_stops);
  return kExitOk;
}
