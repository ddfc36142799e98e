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


#include <random>

#include "doctest.h"
#include "specprec/constrained.hpp"
#include "specprec/metrics.hpp"
#include "test_util.hpp"

using namespace specprec;

namespace {

struct Instance {
  OfdmNumerology num = OfdmNumerology::contiguous(64, 16, 15e3, -20, 40, 4);
  SpectralKernel kernel;
  MaskSpec mask;

  Instance() {
    FrequencyGrid fg;
    fg.points = {22.5, 24.0, -23.5, -26.0};
    kernel = restrict_to_active(build_kernel(num, fg), num);
    mask = calibrate_mask({-60, -65, -60, -65}, -21.5,
                          unit_power_reference(num, 4));
  }

  DataGrid grid(std::uint64_t seed, int nt) const {
    return generate_qam_grid(seed, num, nt, Constellation::kQam16);
  }
};

EvmConstraint wideband(double eps) {
  EvmConstraint e;
  e.eps_avg = eps;
  return e;
}

EvmConstraint per_subcarrier(const OfdmNumerology& num, double eps) {
  EvmConstraint e;
  e.mode = EvmConstraint::Mode::kFrequencySelective;
  e.eps.assign(num.num_active(), eps);
  return e;
}

}  // namespace

TEST_CASE("grid solvers respect the wideband EVM budget") {
  Instance in;
  for (int s = 0; s < 10; ++s) {
    const DataGrid g = in.grid(s, 2);
    const EvmConstraint evm = wideband(0.05);
    const GridResult a = essp_precode(g, in.kernel, {in.mask}, evm, {});
    const GridResult b = eadmm_precode(g, in.kernel, {in.mask}, evm, {});
    CHECK(evm_wideband(g.X, a.Xbar) <= 0.05 * (1 + 1e-12));
    CHECK(evm_wideband(g.X, b.Xbar) <= 0.05 * (1 + 1e-12));
    // Precoding helps.
    CHECK(total_oobe(a.Xbar, in.kernel) < total_oobe(g.X, in.kernel));
    CHECK(total_oobe(b.Xbar, in.kernel) < total_oobe(g.X, in.kernel));
  }
}

TEST_CASE("per-subcarrier budgets hold column by column") {
  Instance in;
  for (int s = 0; s < 5; ++s) {
    const DataGrid g = in.grid(50 + s, 2);
    const EvmConstraint evm = per_subcarrier(in.num, 0.07);
    for (int which = 0; which < 2; ++which) {
      const GridResult r =
          which == 0 ? essp_precode(g, in.kernel, {in.mask}, evm, {})
                     : eadmm_precode(g, in.kernel, {in.mask}, evm, {});
      const EvmReport rep = evm_metrics(g.X, r.Xbar, in.num);
      for (int k : in.num.active_set)
        CHECK(rep.per_subcarrier[k] <= 0.07 * (1 + 1e-12));
      // Idle bins stay empty.
      for (int k = 0; k < 64; ++k)
        if (!rep.subcarrier_valid[k]) CHECK(r.Xbar.col(k).norm() == 0.0);
      // The per-column ball sits inside the wideband ball of equal size.
      CHECK(rep.pooled <= 0.07 * (1 + 1e-12));
    }
  }
}

TEST_CASE("feasible grids are fixed points of ESSP") {
  Instance in;
  const DataGrid g = in.grid(3, 2);
  MaskSpec loose = in.mask;
  for (auto& v : loose.gamma) v *= 1e9;
  EsspConfig cfg;
  cfg.outer_iters = 5;
  cfg.early_stop = false;
  const GridResult r = essp_precode(g, in.kernel, {loose}, wideband(0.05), cfg);
  CHECK((r.Xbar - g.X).norm() < 1e-12 * g.X.norm());
}

TEST_CASE("ESSP early stop returns the last improving iterate") {
  Instance in;
  EsspConfig cfg;
  cfg.outer_iters = 12;
  cfg.z_init = EsspConfig::ZInit::kZero;
  int stopped = 0;
  for (int s = 0; s < 10; ++s) {
    const DataGrid g = in.grid(200 + s, 2);
    const GridResult r = essp_precode(g, in.kernel, {in.mask}, wideband(0.03), cfg);
    REQUIRE(static_cast<int>(r.report.trace.size()) == r.report.iterations);
    if (!r.report.early_stopped) {
      CHECK(r.report.returned_iteration == r.report.iterations);
      continue;
    }
    ++stopped;
    const int ret = r.report.returned_iteration;
    CHECK(ret == r.report.iterations - 1);
    double prev = 0, last = 0;
    for (double v : r.report.trace[r.report.iterations - 1].oobe) last += v;
    if (ret >= 1) {
      for (double v : r.report.trace[ret - 1].oobe) prev += v;
      CHECK(total_oobe(r.Xbar, in.kernel) == doctest::Approx(prev).epsilon(1e-9));
      CHECK(last > prev);
    } else {
      CHECK(r.Xbar == g.X);
    }
  }
  MESSAGE("early stops: " << stopped << "/10");
}

TEST_CASE("relaxation schedule repeats its last value") {
  EsspConfig cfg;
  cfg.relaxation = {1.5, 1.2};
  CHECK(cfg.lambda(1) == 1.5);
  CHECK(cfg.lambda(2) == 1.2);
  CHECK(cfg.lambda(9) == 1.2);
  cfg.relaxation = {2.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.relaxation = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("mask list must match the antenna count") {
  Instance in;
  const DataGrid g = in.grid(1, 2);
  const std::vector<MaskSpec> three{in.mask, in.mask, in.mask};
  CHECK_THROWS_AS(essp_precode(g, in.kernel, three, wideband(0.05), {}),
                  DimensionError);
  CHECK_THROWS_AS(eadmm_precode(g, in.kernel, {}, wideband(0.05), {}),
                  DimensionError);
  // One mask per antenna is accepted.
  MaskSpec tight = in.mask;
  for (auto& v : tight.gamma) v *= 0.1;
  const GridResult r =
      essp_precode(g, in.kernel, {in.mask, tight}, wideband(0.05), {});
  CHECK(r.Xbar.rows() == 2);
}

TEST_CASE("EVM constraint validation") {
  Instance in;
  const DataGrid g = in.grid(1, 1);
  EvmConstraint e = per_subcarrier(in.num, 0.05);
  e.eps.pop_back();
  CHECK_THROWS_AS(essp_precode(g, in.kernel, {in.mask}, e, {}), ConfigError);
  CHECK_THROWS_AS(eadmm_precode(g, in.kernel, {in.mask}, wideband(-0.1), {}),
                  ConfigError);
}

TEST_CASE("feasibility probe on trivial cases") {
  Instance in;
  const DataGrid g = in.grid(9, 1);
  MaskSpec loose = in.mask;
  for (auto& v : loose.gamma) v *= 1e9;
  // Support of 40 columns goes through the oracle.
  const FeasibilityReport f = feasibility_probe(g, g.X, in.kernel, loose, wideband(0.01));
  CHECK(f.oracle_used);
  CHECK(f.feasible);
  CHECK(f.delta_t <= 1.0);
  for (double r : f.mask_ratio) CHECK(r <= 1.0);
  CHECK_THROWS_AS(
      feasibility_probe(g, CMatrix::Zero(2, 64), in.kernel, loose, wideband(0.01)),
      DimensionError);
}

TEST_CASE("wide support falls back to the candidate's mask ratio") {
  const auto num = OfdmNumerology::contiguous(256, 18, 15e3, -48, 96, 12);
  FrequencyGrid fg;
  fg.points = {60.5, -61.5};
  const SpectralKernel k = restrict_to_active(build_kernel(num, fg), num);
  const DataGrid g = generate_qam_grid(4, num, 1, Constellation::kQpsk);
  MaskSpec mask;
  mask.gamma = {1e-3, 1e-3};
  const FeasibilityReport f = feasibility_probe(g, g.X, k, mask, wideband(0.05));
  CHECK_FALSE(f.oracle_used);
  CHECK(f.delta_t == doctest::Approx(max_mask_ratio(g.X, k, mask)));
}
