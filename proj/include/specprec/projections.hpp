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

#include "specprec/types.hpp"

namespace specprec {

// {x : |u^H x|^2 <= bound}.
struct Rank1Constraint {
  CVector u;
  double bound = 0.0;

  void validate() const;  // DegenerateConstraintError / ConfigError
};

// Wideband: one Frobenius ball of `radius` around `center`.
// Per-column: column k is confined to a ball of `radii[k]` around
// center.col(k); a negative radius leaves the column unconstrained.
struct BallConstraint {
  enum class Mode { kWideband, kPerColumn };
  Mode mode = Mode::kWideband;
  CMatrix center;
  double radius = 0.0;
  std::vector<double> radii;
};

CVector project_rank1(const CVector& x, const Rank1Constraint& c);

// Same projection with u and bound passed directly. u_norm_sq = ||u||^2.
void project_rank1_inplace(Eigen::Ref<CVector> x, const CVector& u,
                           double u_norm_sq, double bound);

CMatrix project_frobenius_ball(const CMatrix& x, const BallConstraint& c);
CMatrix project_columns_ball(const CMatrix& x, const BallConstraint& c);

// Dispatches on c.mode.
CMatrix project_ball(const CMatrix& x, const BallConstraint& c);

}  // namespace specprec
