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

#include "specprec/unconstrained.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specprec/projections.hpp"

namespace specprec {

namespace {

void check_inputs(const CVector& d, const SpectralKernel& kernel,
                  const MaskSpec& mask) {
  mask.validate(kernel.rows());
  if (d.size() != kernel.cols())
    throw DimensionError("vector length " + std::to_string(d.size()) +
                         " does not match kernel width " +
                         std::to_string(kernel.cols()));
  if (!d.allFinite()) throw ConfigError("input vector is not finite");
  for (int m = 0; m < kernel.rows(); ++m)
    if (kernel.row_norms_sq[m] == 0.0)
      throw DegenerateConstraintError("kernel row " + std::to_string(m) +
                                      " is zero on the active set");
}

std::vector<double> to_std(const RVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double relative_distance(const CVector& d, const CVector& dbar) {
  const double ref = d.norm();
  return ref > 0.0 ? (d - dbar).norm() / ref : 0.0;
}

}  // namespace

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("admm.rho must be positive");
  if (iters < 1) throw ConfigError("admm.iters must be >= 1");
  if (residual_tol < 0.0) throw ConfigError("admm.residual_tol must be >= 0");
}

void SspConfig::validate() const {
  if (sweeps < 1) throw ConfigError("ssp.sweeps must be >= 1");
  if (!std::isfinite(phi)) throw ConfigError("ssp.phi must be finite");
}

Residuals compute_residuals(const AdmmState& s) {
  Residuals r;
  r.primal = (s.y.colwise() - s.dbar).norm();
  r.dual = std::sqrt(static_cast<double>(s.y.cols())) * s.rho *
           (s.dbar - s.dbar_prev).norm();
  return r;
}

PrecodeResult admm_precode(const CVector& d, const SpectralKernel& kernel,
                           const MaskSpec& mask, const AdmmConfig& cfg) {
  cfg.validate();
  check_inputs(d, kernel, mask);
  const int n = kernel.cols();
  const int m_count = kernel.rows();
  const CMatrix u = kernel.A.adjoint();  // columns conj(a_m)

  AdmmState st;
  st.rho = cfg.rho;
  st.z = CMatrix::Zero(n, m_count);
  if (cfg.init == AdmmConfig::Init::kData) {
    st.y = d.replicate(1, m_count);
    st.dbar = d;
  } else {
    st.y = CMatrix::Zero(n, m_count);
    st.dbar = CVector::Zero(n);
  }
  const double scale = 1.0 / (1.0 + cfg.rho * m_count);
  const double d_norm = d.norm();

  PrecodeResult out;
  for (int it = 1; it <= cfg.iters; ++it) {
    st.dbar_prev = st.dbar;
    st.dbar = scale * (d + cfg.rho * (st.y + st.z).rowwise().sum());
    for (int m = 0; m < m_count; ++m) {
      CVector v = st.dbar - st.z.col(m);
      project_rank1_inplace(v, u.col(m), kernel.row_norms_sq[m],
                            mask.gamma[m]);
      st.z.col(m) += v - st.dbar;
      st.y.col(m) = std::move(v);
    }
    const Residuals res = compute_residuals(st);
    out.report.iterations = it;
    if (cfg.record_trace) {
      TraceRow row;
      row.iter = it;
      row.evm_wideband = relative_distance(d, st.dbar);
      row.oobe = to_std((kernel.A * st.dbar).cwiseAbs2());
      row.primal_res = res.primal;
      row.dual_res = res.dual;
      out.report.trace.push_back(std::move(row));
    }
    if (cfg.residual_tol > 0.0 && res.primal <= cfg.residual_tol * d_norm &&
        res.dual <= cfg.residual_tol * d_norm)
      break;
  }
  out.report.returned_iteration = out.report.iterations;
  out.dbar = std::move(st.dbar);
  return out;
}

std::vector<double> ssp_initial_multipliers(const CVector& d,
                                            const SpectralKernel& kernel,
                                            const MaskSpec& mask, bool clamp) {
  check_inputs(d, kernel, mask);
  const RVector mag = (kernel.A * d).cwiseAbs();
  std::vector<double> mu(kernel.rows());
  for (int m = 0; m < kernel.rows(); ++m) {
    mu[m] = (mag[m] / std::sqrt(mask.gamma[m]) - 1.0) / kernel.row_norms_sq[m];
    if (clamp) mu[m] = std::max(0.0, mu[m]);
  }
  return mu;
}

PrecodeResult ssp_precode(const CVector& d, const SpectralKernel& kernel,
                          const MaskSpec& mask, const SspConfig& cfg) {
  cfg.validate();
  check_inputs(d, kernel, mask);
  const int m_count = kernel.rows();
  const CMatrix gram = kernel.A * kernel.A.adjoint();  // U^H U
  const CVector s = kernel.A * d;                      // U^H d
  const double cos_phi = std::cos(cfg.phi);

  std::vector<double> mu = ssp_initial_multipliers(d, kernel, mask,
                                                   cfg.clamp_nonneg);
  PrecodeResult out;
  std::vector<bool> skip(m_count, false);
  for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
    const std::vector<double> mu_prev = mu;
    for (int m = 0; m < m_count; ++m) {
      skip[m] = true;
      const CMatrix c = inverse_sum_rank1_core(mu, gram, skip);
      skip[m] = false;
      const Complex alpha1 = s[m] - (gram.row(m) * (c * s)).value();
      const double alpha2 =
          (gram(m, m) - (gram.row(m) * (c * gram.col(m))).value()).real();
      const double sg = std::sqrt(mask.gamma[m]);
      double v = (std::abs(alpha1) * cos_phi - sg) / (sg * alpha2);
      if (cfg.clamp_nonneg) v = std::max(0.0, v);
      mu[m] = v;
    }
    out.report.iterations = sweep;
    if (cfg.record_trace) {
      const CMatrix c = inverse_sum_rank1_core(mu, gram);
      const CVector dbar = d - kernel.A.adjoint() * (c * s);
      TraceRow row;
      row.iter = sweep;
      row.evm_wideband = relative_distance(d, dbar);
      const RVector p = (kernel.A * dbar).cwiseAbs2();
      row.oobe = to_std(p);
      double viol = 0.0, dmu = 0.0;
      for (int k = 0; k < m_count; ++k) {
        const double e = std::max(0.0, p[k] - mask.gamma[k]);
        viol += e * e;
        dmu += (mu[k] - mu_prev[k]) * (mu[k] - mu_prev[k]);
      }
      row.primal_res = std::sqrt(viol);
      row.dual_res = std::sqrt(dmu);
      out.report.trace.push_back(std::move(row));
    }
  }
  const CMatrix c = inverse_sum_rank1_core(mu, gram);
  out.dbar = d - kernel.A.adjoint() * (c * s);
  out.report.multipliers = mu;
  out.report.returned_iteration = out.report.iterations;
  return out;
}

}  // namespace specprec
