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

// Reference solvers for small instances. These are slow on purpose: dense
// real-valued Newton steps, no structure exploited beyond what is needed to
// run the large scenario in a reduced subspace.

#pragma once

#include <vector>

#include "specprec/metrics.hpp"
#include "specprec/projections.hpp"
#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"

namespace specprec {

struct OracleConfig {
  double t0 = 1.0;
  double multiplier = 10.0;
  int outer_steps = 8;        // barrier increases after the first centering
  double inner_tol = 1e-10;   // half squared Newton decrement
  int max_inner = 200;

  void validate() const;
};

// ||R z - c||^2 - h - t_coeff * t <= 0 over real variables z (and the
// epigraph scalar t when the objective is kEpigraph).
struct QuadConstraint {
  RMatrix R;
  RVector c;
  double h = 0.0;
  double t_coeff = 0.0;
};

struct OracleProblem {
  enum class Objective { kLeastSquares, kEpigraph };
  Objective objective = Objective::kLeastSquares;
  int dim = 0;
  // Least squares: objective_scale * ||R0 z - c0||^2.
  RMatrix R0;
  RVector c0;
  double objective_scale = 1.0;
  std::vector<QuadConstraint> constraints;
  RVector start;        // strictly feasible
  double t_start = 0.0; // epigraph only
};

struct KktResiduals {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double feasibility = 0.0;

  double max() const;
};

struct OracleSolution {
  RVector z;
  double t = 0.0;
  double objective = 0.0;
  std::vector<double> duals;
  KktResiduals kkt;
  int newton_steps = 0;
};

OracleSolution logbarrier_solve(const OracleProblem& problem,
                                const OracleConfig& cfg = {});

struct MaskLsSolution {
  CVector dbar;
  double distance_sq = 0.0;  // ||d - dbar||^2
  KktResiduals kkt;
};

// min ||d - dbar||^2 s.t. |a_m^T dbar|^2 <= gamma_m, over the columns where
// the kernel is nonzero (at most 64 of them).
MaskLsSolution oracle_mask_projection(const CVector& d,
                                      const SpectralKernel& kernel,
                                      const MaskSpec& mask,
                                      const OracleConfig& cfg = {});

// Same problem posed over dbar = d - A^H w, w in C^M. Any optimum has this
// form, so the oracle scales to full-size kernels.
MaskLsSolution oracle_mask_projection_subspace(const CVector& d,
                                               const SpectralKernel& kernel,
                                               const MaskSpec& mask,
                                               const OracleConfig& cfg = {});

struct EpigraphSolution {
  CMatrix Xbar;
  double delta_t = 0.0;
  KktResiduals kkt;
};

// min t s.t. |a_m^T xbar_j|^2 <= t gamma_m for all m, j and Xbar in the
// EVM ball (absolute radii, centered at X).
EpigraphSolution oracle_epigraph(const CMatrix& X, const SpectralKernel& kernel,
                                 const MaskSpec& mask,
                                 const BallConstraint& evm_ball,
                                 const OracleConfig& cfg = {});

// Projection onto {|u^H z|^2 <= b} by bisection on the multiplier.
// Requires b > 0 and |u^H x|^2 > b.
CVector bisection_rank1_oracle(const CVector& x, const CVector& u, double b);

}  // namespace specprec
