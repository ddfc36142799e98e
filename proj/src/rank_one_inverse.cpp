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
#include <string>

#include "specprec/unconstrained.hpp"

namespace specprec {

namespace {

constexpr double kSingularTol = 1e-12;

void check_mu(const std::vector<double>& mu, int rows) {
  if (static_cast<int>(mu.size()) != rows)
    throw DimensionError("expected " + std::to_string(rows) +
                         " multipliers, got " + std::to_string(mu.size()));
  for (double v : mu)
    if (!std::isfinite(v)) throw ConfigError("non-finite multiplier");
}

}  // namespace

CMatrix inverse_sum_rank1(const std::vector<double>& mu,
                          const SpectralKernel& kernel) {
  check_mu(mu, kernel.rows());
  const int n = kernel.cols();
  CMatrix inv = CMatrix::Identity(n, n);
  for (int m = 0; m < kernel.rows(); ++m) {
    if (mu[m] == 0.0) continue;
    const CVector u = kernel.A.row(m).adjoint();  // conj(a_m)
    const CVector left = inv * u;                 // A_k^{-1} u
    const Eigen::RowVectorXcd right = u.adjoint() * inv;
    const Complex tr = mu[m] * u.dot(left);
    const Complex denom = 1.0 + tr;
    if (std::abs(denom) < kSingularTol)
      throw NumericalSingularityError(
          "rank-1 accumulation singular at term " + std::to_string(m));
    inv.noalias() -= (mu[m] / denom) * left * right;
  }
  return inv;
}

CMatrix inverse_sum_rank1_core(const std::vector<double>& mu,
                               const CMatrix& gram,
                               const std::vector<bool>& skip) {
  const int m_count = static_cast<int>(gram.rows());
  check_mu(mu, m_count);
  CMatrix c = CMatrix::Zero(m_count, m_count);
  for (int k = 0; k < m_count; ++k) {
    if (mu[k] == 0.0 || (!skip.empty() && skip[k])) continue;
    CVector w = -c * gram.col(k);
    w[k] += 1.0;
    CVector w_left = -c.adjoint() * gram.col(k);
    w_left[k] += 1.0;
    const Complex tr = mu[k] * (gram.row(k) * w).value();
    const Complex denom = 1.0 + tr;
    if (std::abs(denom) < kSingularTol)
      throw NumericalSingularityError(
          "rank-1 accumulation singular at term " + std::to_string(k));
    c.noalias() += (mu[k] / denom) * w * w_left.adjoint();
  }
  return c;
}

}  // namespace specprec
