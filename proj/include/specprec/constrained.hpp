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

#pragma once

#include <vector>

#include "specprec/metrics.hpp"
#include "specprec/oracle.hpp"
#include "specprec/projections.hpp"
#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"
#include "specprec/unconstrained.hpp"

namespace specprec {

// EVM budgets as fractions of the reference signal norm.
struct EvmConstraint {
  enum class Mode { kWideband, kFrequencySelective };
  Mode mode = Mode::kWideband;
  double eps_avg = 0.08;
  std::vector<double> eps;  // one per active subcarrier, active_set order

  void validate(const OfdmNumerology& num) const;

  // Absolute ball around X: eps_avg * ||X||_F, or eps[k] * ||X[:,k]|| per
  // active column with idle columns pinned.
  BallConstraint ball_for(const CMatrix& X, const OfdmNumerology& num) const;
};

struct EsspConfig {
  // kData: Z = X at start, so X inside both sets is a fixed point.
  // kZero: Z = 0.
  enum class ZInit { kData, kZero };

  int outer_iters = 2;
  int inner_sweeps = 2;
  std::vector<double> relaxation{1.0};  // last value repeats
  double tau = 1.0;
  bool early_stop = true;
  ZInit z_init = ZInit::kData;
  double phi = 0.0;
  bool record_trace = true;

  void validate() const;
  double lambda(int iter) const;  // 1-based
};

struct GridResult {
  CMatrix Xbar;
  SolverReport report;
};

// `masks` holds one MaskSpec shared by all antennas or one per antenna.
GridResult eadmm_precode(const DataGrid& X, const SpectralKernel& kernel,
                         const std::vector<MaskSpec>& masks,
                         const EvmConstraint& evm, const AdmmConfig& cfg);

GridResult essp_precode(const DataGrid& X, const SpectralKernel& kernel,
                        const std::vector<MaskSpec>& masks,
                        const EvmConstraint& evm, const EsspConfig& cfg);

struct FeasibilityReport {
  double delta_t = 0.0;
  bool feasible = false;
  bool oracle_used = false;
  std::vector<double> mask_ratio;  // worst antenna per point
  KktResiduals kkt;
};

// Mask ratios of a candidate precoded grid. With at most 64 support columns
// delta_t comes from the epigraph oracle; otherwise it is the candidate's
// worst mask ratio, an upper bound on the optimum.
FeasibilityReport feasibility_probe(const DataGrid& X, const CMatrix& Xbar,
                                    const SpectralKernel& kernel,
                                    const MaskSpec& mask,
                                    const EvmConstraint& evm,
                                    const OracleConfig& cfg = {});

}  // namespace specprec
