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

#include "specprec/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace specprec {

NotchProjector::NotchProjector(const SpectralKernel& kernel) : a_(kernel.A) {
  const CMatrix g = a_ * a_.adjoint();
  gram_.compute(g);
  const double scale = g.diagonal().real().maxCoeff();
  if (gram_.info() != Eigen::Success || !(scale > 0.0))
    throw ConfigError("A A^H is singular; frequency points must be distinct");
  const double dmin = gram_.vectorD().real().minCoeff();
  if (!(dmin > 1e-13 * scale))
    throw ConfigError("A A^H is rank deficient; frequency points must be "
                      "distinct");
}

CVector NotchProjector::apply(const CVector& d) const {
  if (d.size() != a_.cols())
    throw DimensionError("vector length does not match kernel width");
  CVector w = gram_.solve(a_ * d);
  CVector pd = a_.adjoint() * w;
  // Refinement: the residual A (d - P d) should vanish.
  const CVector r = a_ * (d - pd);
  pd += a_.adjoint() * gram_.solve(r);
  return pd;
}

CMatrix NotchProjector::matrix(double alpha) const {
  const int n = static_cast<int>(a_.cols());
  return CMatrix::Identity(n, n) - alpha * (a_.adjoint() * gram_.solve(a_));
}

CVector nsp_precode(const CVector& d, const NotchProjector& p) {
  return d - p.apply(d);
}

CVector nsp_precode(const CVector& d, const SpectralKernel& kernel) {
  return nsp_precode(d, NotchProjector(kernel));
}

EnspResult ensp_precode(const CVector& d, const NotchProjector& p,
                        double evm_target) {
  if (!(evm_target >= 0.0) || !std::isfinite(evm_target))
    throw ConfigError("ENSP EVM target must be nonnegative");
  EnspResult r;
  const CVector pd = p.apply(d);
  const double pn = pd.norm();
  if (pn == 0.0) {
    r.dbar = d;
    r.feasible_without_precoding = true;
    return r;
  }
  r.alpha = std::min(1.0, evm_target * d.norm() / pn);
  r.dbar = d - r.alpha * pd;
  return r;
}

EnspResult ensp_precode(const CVector& d, const SpectralKernel& kernel,
                        double evm_target) {
  return ensp_precode(d, NotchProjector(kernel), evm_target);
}

}  // namespace specprec
