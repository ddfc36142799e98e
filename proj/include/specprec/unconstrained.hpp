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
#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"

namespace specprec {

struct TraceRow {
  int iter = 0;             // 1-based
  double evm_wideband = 0;  // ||d - dbar|| / ||d||
  std::vector<double> oobe; // |a(nu_m)^T dbar|^2
  double primal_res = 0;
  double dual_res = 0;
};

struct SolverReport {
  std::vector<TraceRow> trace;
  std::vector<double> multipliers;  // SSP only
  int iterations = 0;
  bool early_stopped = false;
  // Trace index (1-based) of the iterate actually returned; equals
  // `iterations` unless early stopping rolled back.
  int returned_iteration = 0;
};

struct AdmmConfig {
  // kZero: y_m = z_m = 0 before the first consensus step.
  // kData: y_m = d, z_m = 0, so a mask-feasible d is a fixed point.
  enum class Init { kZero, kData };

  double rho = 10.0;
  Init init = Init::kData;
  int iters = 100;
  double residual_tol = 0.0;  // 0 = run all iterations
  bool record_trace = true;

  void validate() const;
};

struct SspConfig {
  int sweeps = 3;
  double phi = 0.0;
  bool clamp_nonneg = true;
  bool record_trace = true;

  void validate() const;
};

struct PrecodeResult {
  CVector dbar;
  SolverReport report;
};

// Scaled-form consensus ADMM state for one vector.
struct AdmmState {
  double rho = 1.0;
  CVector dbar;
  CVector dbar_prev;
  CMatrix y;  // N x M, column m is y_m
  CMatrix z;
};

struct Residuals {
  double primal = 0;
  double dual = 0;
};

Residuals compute_residuals(const AdmmState& state);

PrecodeResult admm_precode(const CVector& d, const SpectralKernel& kernel,
                           const MaskSpec& mask, const AdmmConfig& cfg);

// (I + sum_m mu_m conj(a_m) a_m^T)^{-1} accumulated one rank-1 term at a
// time starting from the identity. Dense N x N.
CMatrix inverse_sum_rank1(const std::vector<double>& mu,
                          const SpectralKernel& kernel);

// The same inverse kept in the span of the constraint directions:
// G^{-1} = I - U C U^H with U = [conj(a_1) ... conj(a_M)]. Returns C (M x M)
// given the Gram matrix K = U^H U. Terms with skip[m] set are left out.
CMatrix inverse_sum_rank1_core(const std::vector<double>& mu,
                               const CMatrix& gram,
                               const std::vector<bool>& skip = {});

PrecodeResult ssp_precode(const CVector& d, const SpectralKernel& kernel,
                          const MaskSpec& mask, const SspConfig& cfg);

// Closed-form starting multipliers from the largest Gram eigenvalue, clamped
// at zero when asked.
std::vector<double> ssp_initial_multipliers(const CVector& d,
                                            const SpectralKernel& kernel,
                                            const MaskSpec& mask, bool clamp);

}  // namespace specprec
