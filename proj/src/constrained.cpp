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

#include "specprec/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specprec {

namespace {

const MaskSpec& mask_for(const std::vector<MaskSpec>& masks, int j) {
  return masks.size() == 1 ? masks[0] : masks[j];
}

void check_grid(const DataGrid& X, const SpectralKernel& kernel,
                const std::vector<MaskSpec>& masks) {
  if (X.X.cols() != kernel.cols())
    throw DimensionError("grid width does not match kernel width");
  if (X.X.rows() < 1) throw DimensionError("grid has no antennas");
  if (masks.empty() ||
      (masks.size() != 1 && static_cast<Eigen::Index>(masks.size()) !=
                                X.X.rows()))
    throw DimensionError("expected one shared mask or one per antenna");
  for (const auto& m : masks) m.validate(kernel.rows());
  for (int m = 0; m < kernel.rows(); ++m)
    if (kernel.row_norms_sq[m] == 0.0)
      throw DegenerateConstraintError("kernel row " + std::to_string(m) +
                                      " is zero on the active set");
}

// Per-point OOBE summed over antennas.
std::vector<double> oobe_per_point(const CMatrix& Xbar,
                                   const SpectralKernel& kernel) {
  const RVector p = (kernel.A * Xbar.transpose()).cwiseAbs2().rowwise().sum();
  return std::vector<double>(p.data(), p.data() + p.size());
}

double safe_evm(const CMatrix& X, const CMatrix& Xbar) {
  const double ref = X.norm();
  return ref > 0.0 ? (Xbar - X).norm() / ref : 0.0;
}

}  // namespace

void EvmConstraint::validate(const OfdmNumerology& num) const {
  if (mode == Mode::kWideband) {
    if (!(eps_avg >= 0.0) || !std::isfinite(eps_avg))
      throw ConfigError("evm.wideband_fraction must be >= 0");
    return;
  }
  if (static_cast<int>(eps.size()) != num.num_active())
    throw ConfigError("frequency-selective EVM needs " +
                      std::to_string(num.num_active()) +
                      " per-subcarrier budgets, got " +
                      std::to_string(eps.size()));
  for (double e : eps)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw ConfigError("per-subcarrier EVM budgets must be >= 0");
}

BallConstraint EvmConstraint::ball_for(const CMatrix& X,
                                       const OfdmNumerology& num) const {
  validate(num);
  if (X.cols() != num.fft_size)
    throw DimensionError("grid width does not match fft_size");
  BallConstraint b;
  b.center = X;
  if (mode == Mode::kWideband) {
    b.mode = BallConstraint::Mode::kWideband;
    b.radius = eps_avg * X.norm();
    return b;
  }
  b.mode = BallConstraint::Mode::kPerColumn;
  b.radii.assign(num.fft_size, 0.0);
  for (int i = 0; i < num.num_active(); ++i) {
    const int k = num.active_set[i];
    b.radii[k] = eps[i] * X.col(k).norm();
  }
  return b;
}

void EsspConfig::validate() const {
  if (outer_iters < 1) throw ConfigError("essp.outer_iters must be >= 1");
  if (inner_sweeps < 1) throw ConfigError("essp.inner_sweeps must be >= 1");
  if (relaxation.empty())
    throw ConfigError("essp.relaxation needs at least one value");
  for (double l : relaxation)
    if (!(l > 0.0 && l < 2.0))
      throw ConfigError("essp.relaxation values must lie in (0, 2)");
  if (!(tau > 0.0)) throw ConfigError("essp.tau must be positive");
}

double EsspConfig::lambda(int iter) const {
  const size_t i = static_cast<size_t>(std::max(1, iter) - 1);
  return relaxation[std::min(i, relaxation.size() - 1)];
}

GridResult eadmm_precode(const DataGrid& X, const SpectralKernel& kernel,
                         const std::vector<MaskSpec>& masks,
                         const EvmConstraint& evm, const AdmmConfig& cfg) {
  cfg.validate();
  check_grid(X, kernel, masks);
  const BallConstraint ball = evm.ball_for(X.X, X.numerology);
  const int m_count = kernel.rows();
  const int nt = X.antennas();
  const int n = kernel.cols();
  const CMatrix u = kernel.A.adjoint();

  std::vector<CMatrix> y(m_count, CMatrix::Zero(nt, n));
  std::vector<CMatrix> z(m_count, CMatrix::Zero(nt, n));
  CMatrix xbar = CMatrix::Zero(nt, n);
  const double x_norm = X.X.norm();

  GridResult out;
  for (int it = 1; it <= cfg.iters; ++it) {
    CMatrix avg = CMatrix::Zero(nt, n);
    for (int m = 0; m < m_count; ++m) avg += y[m] + z[m];
    avg /= static_cast<double>(m_count);
    const CMatrix xprev = xbar;
    xbar = project_ball(avg, ball);
    double primal_sq = 0.0;
    for (int m = 0; m < m_count; ++m) {
      CMatrix v = xbar - z[m];
      for (int j = 0; j < nt; ++j) {
        CVector row = v.row(j).transpose();
        project_rank1_inplace(row, u.col(m), kernel.row_norms_sq[m],
                              mask_for(masks, j).gamma[m]);
        v.row(j) = row.transpose();
      }
      z[m] += v - xbar;
      primal_sq += (v - xbar).squaredNorm();
      y[m] = std::move(v);
    }
    const double dual = std::sqrt(static_cast<double>(m_count)) * cfg.rho *
                        (xbar - xprev).norm();
    out.report.iterations = it;
    if (cfg.record_trace) {
      TraceRow row;
      row.iter = it;
      row.evm_wideband = safe_evm(X.X, xbar);
      row.oobe = oobe_per_point(xbar, kernel);
      row.primal_res = std::sqrt(primal_sq);
      row.dual_res = dual;
      out.report.trace.push_back(std::move(row));
    }
    if (cfg.residual_tol > 0.0 &&
        std::sqrt(primal_sq) <= cfg.residual_tol * x_norm &&
        dual <= cfg.residual_tol * x_norm)
      break;
  }
  out.report.returned_iteration = out.report.iterations;
  out.Xbar = std::move(xbar);
  return out;
}

GridResult essp_precode(const DataGrid& X, const SpectralKernel& kernel,
                        const std::vector<MaskSpec>& masks,
                        const EvmConstraint& evm, const EsspConfig& cfg) {
  cfg.validate();
  check_grid(X, kernel, masks);
  const BallConstraint ball = evm.ball_for(X.X, X.numerology);
  const int nt = X.antennas();

  SspConfig inner;
  inner.sweeps = cfg.inner_sweeps;
  inner.phi = cfg.phi;
  inner.record_trace = false;

  CMatrix xbar = X.X;
  CMatrix zbar = cfg.z_init == EsspConfig::ZInit::kData
                     ? X.X
                     : CMatrix::Zero(X.X.rows(), X.X.cols());
  double prev_total = total_oobe(xbar, kernel);

  GridResult out;
  for (int it = 1; it <= cfg.outer_iters; ++it) {
    const CMatrix v = 2.0 * xbar - zbar;
    CMatrix ybar(v.rows(), v.cols());
    for (int j = 0; j < nt; ++j)
      ybar.row(j) = ssp_precode(v.row(j).transpose(), kernel,
                                mask_for(masks, j), inner)
                        .dbar.transpose();
    const double lam = cfg.lambda(it);
    zbar += lam * (ybar - xbar);
    CMatrix next = project_ball(zbar, ball);
    const double total = total_oobe(next, kernel);
    out.report.iterations = it;
    if (cfg.record_trace) {
      TraceRow row;
      row.iter = it;
      row.evm_wideband = safe_evm(X.X, next);
      row.oobe = oobe_per_point(next, kernel);
      row.primal_res = (ybar - xbar).norm();
      row.dual_res = (next - xbar).norm();
      out.report.trace.push_back(std::move(row));
    }
    if (cfg.early_stop && total > prev_total) {
      out.report.early_stopped = true;
      out.report.returned_iteration = it - 1;
      out.Xbar = std::move(xbar);
      return out;
    }
    xbar = std::move(next);
    prev_total = total;
  }
  out.report.returned_iteration = out.report.iterations;
  out.Xbar = std::move(xbar);
  return out;
}

FeasibilityReport feasibility_probe(const DataGrid& X, const CMatrix& Xbar,
                                    const SpectralKernel& kernel,
                                    const MaskSpec& mask,
                                    const EvmConstraint& evm,
                                    const OracleConfig& cfg) {
  check_grid(X, kernel, {mask});
  if (Xbar.rows() != X.X.rows() || Xbar.cols() != X.X.cols())
    throw DimensionError("candidate grid differs in shape from the reference");
  FeasibilityReport r;
  r.mask_ratio.assign(kernel.rows(), 0.0);
  for (int j = 0; j < X.antennas(); ++j) {
    const RVector p = mask_ratio(Xbar.row(j).transpose(), kernel, mask);
    for (int m = 0; m < kernel.rows(); ++m)
      r.mask_ratio[m] = std::max(r.mask_ratio[m], p[m]);
  }
  int support = 0;
  for (int k = 0; k < kernel.cols(); ++k)
    if (kernel.A.col(k).squaredNorm() > 0.0) ++support;
  if (support <= 64) {
    const EpigraphSolution e = oracle_epigraph(
        X.X, kernel, mask, evm.ball_for(X.X, X.numerology), cfg);
    r.delta_t = e.delta_t;
    r.kkt = e.kkt;
    r.oracle_used = true;
    r.feasible = e.delta_t <= 1.0;
  } else {
    r.delta_t = *std::max_element(r.mask_ratio.begin(), r.mask_ratio.end());
    r.feasible = r.delta_t <= 1.0;
  }
  return r;
}

}  // namespace specprec
