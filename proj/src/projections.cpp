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

#include "specprec/projections.hpp"

#include <cmath>
#include <string>

namespace specprec {

void Rank1Constraint::validate() const {
  if (!(bound >= 0.0) || !std::isfinite(bound))
    throw ConfigError("rank-1 bound must be finite and nonnegative");
  if (u.size() == 0 || u.squaredNorm() == 0.0)
    throw DegenerateConstraintError("rank-1 constraint direction is zero");
}

void project_rank1_inplace(Eigen::Ref<CVector> x, const CVector& u,
                           double u_norm_sq, double bound) {
  const Complex inner = u.dot(x);  // u^H x
  const double mag_sq = std::norm(inner);
  // Boundary points take the identity branch.
  if (mag_sq <= bound) return;
  const double mag = std::sqrt(mag_sq);
  const double coef = (std::sqrt(bound) - mag) / (u_norm_sq * mag);
  x.noalias() += (coef * inner) * u;
}

CVector project_rank1(const CVector& x, const Rank1Constraint& c) {
  c.validate();
  if (x.size() != c.u.size())
    throw DimensionError("vector length " + std::to_string(x.size()) +
                         " does not match constraint length " +
                         std::to_string(c.u.size()));
  CVector out = x;
  project_rank1_inplace(out, c.u, c.u.squaredNorm(), c.bound);
  return out;
}

CMatrix project_frobenius_ball(const CMatrix& x, const BallConstraint& c) {
  if (x.rows() != c.center.rows() || x.cols() != c.center.cols())
    throw DimensionError("ball center shape does not match input");
  if (!(c.radius >= 0.0)) throw ConfigError("ball radius must be >= 0");
  const double dist = (x - c.center).norm();
  if (dist <= c.radius) return x;
  return c.center + (c.radius / dist) * (x - c.center);
}

CMatrix project_columns_ball(const CMatrix& x, const BallConstraint& c) {
  if (x.rows() != c.center.rows() || x.cols() != c.center.cols())
    throw DimensionError("ball center shape does not match input");
  if (static_cast<Eigen::Index>(c.radii.size()) != x.cols())
    throw DimensionError("expected " + std::to_string(x.cols()) +
                         " column radii, got " +
                         std::to_string(c.radii.size()));
  CMatrix out = x;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double r = c.radii[k];
    if (r < 0.0) continue;
    const double dist = (x.col(k) - c.center.col(k)).norm();
    if (dist <= r) continue;
    out.col(k) = c.center.col(k) + (r / dist) * (x.col(k) - c.center.col(k));
  }
  return out;
}

CMatrix project_ball(const CMatrix& x, const BallConstraint& c) {
  return c.mode == BallConstraint::Mode::kWideband
             ? project_frobenius_ball(x, c)
             : project_columns_ball(x, c);
}

}  // namespace specprec
