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

#include <Eigen/Cholesky>

#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"

namespace specprec {

// Applies P = A^H (A A^H)^{-1} A without forming the N x N matrix.
class NotchProjector {
 public:
  explicit NotchProjector(const SpectralKernel& kernel);

  // P d, with one step of iterative refinement on the M x M solve.
  CVector apply(const CVector& d) const;

  // Dense I - alpha P, for inspection.
  CMatrix matrix(double alpha) const;

 private:
  CMatrix a_;
  Eigen::LDLT<CMatrix> gram_;
};

CVector nsp_precode(const CVector& d, const SpectralKernel& kernel);
CVector nsp_precode(const CVector& d, const NotchProjector& p);

struct EnspResult {
  CVector dbar;
  double alpha = 0.0;
  // P d was zero; the input already has nulls and is returned unchanged.
  bool feasible_without_precoding = false;
};

EnspResult ensp_precode(const CVector& d, const NotchProjector& p,
                        double evm_target);
EnspResult ensp_precode(const CVector& d, const SpectralKernel& kernel,
                        double evm_target);

}  // namespace specprec
