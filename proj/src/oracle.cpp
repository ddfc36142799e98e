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

#include "specprec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace specprec {

namespace {

constexpr int kMaxSupport = 64;

std::string dump(const RVector& v, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << " z=[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

// Real 2 x 2n block mapping [Re x; Im x] to [Re(a^T x); Im(a^T x)].
RMatrix real_row(const Eigen::RowVectorXcd& a) {
  const Eigen::Index n = a.size();
  RMatrix r(2, 2 * n);
  r.block(0, 0, 1, n) = a.real();
  r.block(0, n, 1, n) = -a.imag();
  r.block(1, 0, 1, n) = a.imag();
  r.block(1, n, 1, n) = a.real();
  return r;
}

RVector to_real(const CVector& x) {
  RVector z(2 * x.size());
  z.head(x.size()) = x.real();
  z.tail(x.size()) = x.imag();
  return z;
}

CVector to_complex(const RVector& z) {
  const Eigen::Index n = z.size() / 2;
  CVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = Complex(z[i], z[n + i]);
  return x;
}

std::vector<int> kernel_support(const SpectralKernel& kernel) {
  std::vector<int> cols;
  for (int k = 0; k < kernel.cols(); ++k)
    if (kernel.A.col(k).squaredNorm() > 0.0) cols.push_back(k);
  return cols;
}

struct Barrier {
  const OracleProblem& p;
  bool epi;
  int nv;

  explicit Barrier(const OracleProblem& prob)
      : p(prob),
        epi(prob.objective == OracleProblem::Objective::kEpigraph),
        nv(prob.dim + (epi ? 1 : 0)) {}

  double t_of(const RVector& v) const { return epi ? v[p.dim] : 0.0; }

  double f(const QuadConstraint& q, const RVector& v) const {
    return (q.R * v.head(p.dim) - q.c).squaredNorm() - q.h -
           q.t_coeff * t_of(v);
  }

  double f0(const RVector& v) const {
    if (epi) return v[p.dim];
    return p.objective_scale * (p.R0 * v.head(p.dim) - p.c0).squaredNorm();
  }

  RVector grad_f0(const RVector& v) const {
    RVector g = RVector::Zero(nv);
    if (epi) {
      g[p.dim] = 1.0;
    } else {
      g.head(p.dim) = 2.0 * p.objective_scale * p.R0.transpose() *
                      (p.R0 * v.head(p.dim) - p.c0);
    }
    return g;
  }

  RVector grad_f(const QuadConstraint& q, const RVector& v) const {
    RVector g = RVector::Zero(nv);
    g.head(p.dim) = 2.0 * q.R.transpose() * (q.R * v.head(p.dim) - q.c);
    if (epi) g[p.dim] = -q.t_coeff;
    return g;
  }

  // +inf outside the strict interior.
  double value(const RVector& v, double tb) const {
    double acc = tb * f0(v);
    for (const auto& q : p.constraints) {
      const double fi = f(q, v);
      if (!(fi < 0.0)) return std::numeric_limits<double>::infinity();
      acc -= std::log(-fi);
    }
    return acc;
  }

  void derivatives(const RVector& v, double tb, RVector& g, RMatrix& h) const {
    g = tb * grad_f0(v);
    h = RMatrix::Zero(nv, nv);
    if (!epi)
      h.topLeftCorner(p.dim, p.dim) =
          2.0 * tb * p.objective_scale * p.R0.transpose() * p.R0;
    for (const auto& q : p.constraints) {
      const double fi = f(q, v);
      const RVector gi = grad_f(q, v);
      g += gi / (-fi);
      h += gi * gi.transpose() / (fi * fi);
      h.topLeftCorner(p.dim, p.dim) += 2.0 * q.R.transpose() * q.R / (-fi);
    }
  }
};

KktResiduals kkt_at(const RVector& g0, const RMatrix& grads,
                    const std::vector<double>& fval,
                    const std::vector<double>& lam) {
  KktResiduals k;
  RVector stat = g0;
  for (Eigen::Index i = 0; i < grads.cols(); ++i) {
    stat += lam[i] * grads.col(i);
    k.complementarity = std::max(k.complementarity, lam[i] * -fval[i]);
    k.feasibility = std::max(k.feasibility, std::max(0.0, fval[i]));
  }
  k.stationarity = stat.lpNorm<Eigen::Infinity>();
  return k;
}

// Barrier duals carry an O(1/t) bias and inherit the rounding floor of the
// centering step. Refit them by least squares over the constraints the
// barrier marks as active, dropping negative entries until none remain.
std::vector<double> polish_duals(const RVector& g0, const RMatrix& grads,
                                 const std::vector<double>& barrier) {
  const Eigen::Index nc = grads.cols();
  std::vector<double> out(nc, 0.0);
  if (nc == 0) return out;
  const double top = *std::max_element(barrier.begin(), barrier.end());
  std::vector<Eigen::Index> act;
  for (Eigen::Index i = 0; i < nc; ++i)
    if (barrier[i] >= 1e-4 * top) act.push_back(i);
  while (!act.empty()) {
    RMatrix g(grads.rows(), static_cast<Eigen::Index>(act.size()));
    for (size_t j = 0; j < act.size(); ++j) g.col(j) = grads.col(act[j]);
    const RVector lam = g.colPivHouseholderQr().solve(-g0);
    if (!lam.allFinite()) return out;
    Eigen::Index worst = -1;
    for (Eigen::Index j = 0; j < lam.size(); ++j)
      if (lam[j] < 0.0 && (worst < 0 || lam[j] < lam[worst])) worst = j;
    if (worst < 0) {
      for (size_t j = 0; j < act.size(); ++j) out[act[j]] = lam[j];
      return out;
    }
    act.erase(act.begin() + worst);
  }
  return out;
}

struct Refined {
  RVector v;
  std::vector<double> lam;
  KktResiduals kkt;
};

Refined evaluate(const Barrier& b, const RVector& v,
                 const std::vector<double>& lam) {
  const auto& cons = b.p.constraints;
  const int nc = static_cast<int>(cons.size());
  Refined r;
  r.v = v;
  r.lam = lam;
  std::vector<double> fval(nc);
  RMatrix grads(b.nv, nc);
  for (int i = 0; i < nc; ++i) {
    fval[i] = b.f(cons[i], v);
    grads.col(i) = b.grad_f(cons[i], v);
  }
  r.kkt = kkt_at(b.grad_f0(v), grads, fval, lam);
  for (double l : lam)
    if (l < 0.0) r.kkt.feasibility = std::max(r.kkt.feasibility, -l);
  return r;
}

// Newton on the KKT equations of the constraints with positive multipliers.
// A multiplier that turns negative means the constraint was only nearly
// active; it is dropped and the solve restarts from the barrier point.
// Removes the O(1/t) offset the barrier leaves in the primal point; callers
// keep the result only when the residuals improve.
Refined refine_active_set(const Barrier& b, const RVector& v0,
                          const std::vector<double>& lam0) {
  const auto& cons = b.p.constraints;
  const int nv = b.nv;
  const int dim = b.p.dim;
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(cons.size()); ++i)
    if (lam0[i] > 0.0) act.push_back(i);

  Refined best = evaluate(b, v0, lam0);
  while (!act.empty()) {
    RVector v = v0;
    std::vector<double> lam(lam0.size(), 0.0);
    for (int i : act) lam[i] = lam0[i];
    const int na = static_cast<int>(act.size());
    for (int it = 0; it < 6; ++it) {
      RMatrix jac = RMatrix::Zero(nv + na, nv + na);
      RVector rhs(nv + na);
      RVector stat = b.grad_f0(v);
      if (!b.epi)
        jac.topLeftCorner(dim, dim) =
            2.0 * b.p.objective_scale * b.p.R0.transpose() * b.p.R0;
      for (int j = 0; j < na; ++j) {
        const auto& q = cons[act[j]];
        const RVector gi = b.grad_f(q, v);
        stat += lam[act[j]] * gi;
        jac.topLeftCorner(dim, dim) +=
            2.0 * lam[act[j]] * q.R.transpose() * q.R;
        jac.block(0, nv + j, nv, 1) = gi;
        jac.block(nv + j, 0, 1, nv) = gi.transpose();
        rhs[nv + j] = -b.f(q, v);
      }
      rhs.head(nv) = -stat;
      const RVector step = jac.colPivHouseholderQr().solve(rhs);
      if (!step.allFinite()) break;
      v += step.head(nv);
      for (int j = 0; j < na; ++j) lam[act[j]] += step[nv + j];
    }
    const Refined r = evaluate(b, v, lam);
    if (r.kkt.max() < best.kkt.max()) best = r;
    int worst = -1;
    for (int j = 0; j < na; ++j)
      if (lam[act[j]] < 0.0 && (worst < 0 || lam[act[j]] < lam[act[worst]]))
        worst = j;
    if (worst < 0) break;
    act.erase(act.begin() + worst);
  }
  return best;
}

}  // namespace

void OracleConfig::validate() const {
  if (!(t0 > 0.0)) throw ConfigError("oracle t0 must be positive");
  if (!(multiplier > 1.0)) throw ConfigError("oracle multiplier must be > 1");
  if (outer_steps < 0) throw ConfigError("oracle outer_steps must be >= 0");
  if (!(inner_tol > 0.0)) throw ConfigError("oracle inner_tol must be > 0");
  if (max_inner < 1) throw ConfigError("oracle max_inner must be >= 1");
}

double KktResiduals::max() const {
  return std::max({stationarity, complementarity, feasibility});
}

OracleSolution logbarrier_solve(const OracleProblem& problem,
                                const OracleConfig& cfg) {
  cfg.validate();
  const Barrier b(problem);
  if (problem.dim <= 0 || problem.start.size() != problem.dim)
    throw DimensionError("oracle start point has the wrong dimension");
  for (const auto& q : problem.constraints)
    if (q.R.cols() != problem.dim || q.R.rows() != q.c.size())
      throw DimensionError("oracle constraint has the wrong shape");

  RVector v(b.nv);
  v.head(problem.dim) = problem.start;
  if (b.epi) v[problem.dim] = problem.t_start;
  if (!std::isfinite(b.value(v, cfg.t0)))
    throw OracleError("oracle start point is not strictly feasible",
                      dump(v.head(problem.dim), b.t_of(v)));

  OracleSolution sol;
  double tb = cfg.t0;
  RVector g;
  RMatrix h;
  for (int outer = 0; outer <= cfg.outer_steps; ++outer) {
    if (outer > 0) tb *= cfg.multiplier;
    bool centered = false;
    for (int it = 0; it < cfg.max_inner; ++it) {
      b.derivatives(v, tb, g, h);
      Eigen::LDLT<RMatrix> ldlt(h);
      const RVector step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !step.allFinite())
        throw OracleError("Newton system could not be solved",
                          dump(v.head(problem.dim), b.t_of(v)));
      const double dec = -g.dot(step);
      ++sol.newton_steps;
      if (dec / 2.0 <= cfg.inner_tol) {
        centered = true;
        break;
      }
      const double f_cur = b.value(v, tb);
      double s = 1.0;
      RVector trial = v + s * step;
      double f_new = b.value(trial, tb);
      // Near the center the barrier value is dominated by rounding, so only
      // strict feasibility is enforced there (pure Newton region).
      const bool pure = dec < 1e-3;
      auto accept = [&] {
        return pure ? std::isfinite(f_new)
                    : f_new <= f_cur - 0.25 * s * dec;
      };
      int guard = 0;
      while (!accept() && guard < 80) {
        s *= 0.5;
        trial = v + s * step;
        f_new = b.value(trial, tb);
        ++guard;
      }
      if (guard == 80) {
        // No further progress is representable; accept the current point.
        centered = true;
        break;
      }
      v = trial;
    }
    if (!centered)
      throw OracleError("Newton centering did not converge at t=" +
                            std::to_string(tb),
                        dump(v.head(problem.dim), b.t_of(v)));
  }

  sol.z = v.head(problem.dim);
  sol.t = b.t_of(v);
  sol.objective = b.f0(v);

  const int nc = static_cast<int>(problem.constraints.size());
  std::vector<double> fval(nc);
  RMatrix grads(b.nv, nc);
  std::vector<double> barrier_duals(nc);
  for (int i = 0; i < nc; ++i) {
    fval[i] = b.f(problem.constraints[i], v);
    grads.col(i) = b.grad_f(problem.constraints[i], v);
    barrier_duals[i] = 1.0 / (tb * (-fval[i]));
  }
  const RVector g0 = b.grad_f0(v);
  const KktResiduals barrier_kkt =
      kkt_at(g0, grads, fval, barrier_duals);
  const std::vector<double> polished =
      polish_duals(g0, grads, barrier_duals);
  const KktResiduals polished_kkt = kkt_at(g0, grads, fval, polished);
  if (polished_kkt.max() < barrier_kkt.max()) {
    sol.duals = polished;
    sol.kkt = polished_kkt;
  } else {
    sol.duals = barrier_duals;
    sol.kkt = barrier_kkt;
  }
  const Refined ref = refine_active_set(b, v, polished);
  if (ref.kkt.max() < sol.kkt.max()) {
    sol.z = ref.v.head(problem.dim);
    sol.t = b.t_of(ref.v);
    sol.objective = b.f0(ref.v);
    sol.duals = ref.lam;
    sol.kkt = ref.kkt;
  }
  return sol;
}

MaskLsSolution oracle_mask_projection(const CVector& d,
                                      const SpectralKernel& kernel,
                                      const MaskSpec& mask,
                                      const OracleConfig& cfg) {
  mask.validate(kernel.rows());
  if (d.size() != kernel.cols())
    throw DimensionError("vector length does not match kernel width");
  const std::vector<int> sup = kernel_support(kernel);
  const int ns = static_cast<int>(sup.size());
  if (ns == 0 || ns > kMaxSupport)
    throw ConfigError("full-coordinate oracle supports 1..64 free entries");

  MaskLsSolution out;
  const RVector ratio = mask_ratio(d, kernel, mask);
  if (ratio.maxCoeff() < 1.0) {
    out.dbar = d;
    return out;
  }

  CVector ds(ns);
  Eigen::MatrixXcd as(kernel.rows(), ns);
  for (int i = 0; i < ns; ++i) {
    ds[i] = d[sup[i]];
    as.col(i) = kernel.A.col(sup[i]);
  }
  OracleProblem p;
  p.objective = OracleProblem::Objective::kLeastSquares;
  p.dim = 2 * ns;
  p.R0 = RMatrix::Identity(p.dim, p.dim);
  p.c0 = to_real(ds);
  const double dn = d.squaredNorm();
  p.objective_scale = dn > 0.0 ? 1.0 / dn : 1.0;
  for (int m = 0; m < kernel.rows(); ++m) {
    QuadConstraint q;
    q.R = real_row(as.row(m)) / std::sqrt(mask.gamma[m]);
    q.c = RVector::Zero(2);
    q.h = 1.0;
    p.constraints.push_back(std::move(q));
  }
  p.start = RVector::Zero(p.dim);
  const OracleSolution sol = logbarrier_solve(p, cfg);
  out.dbar = d;
  const CVector xs = to_complex(sol.z);
  for (int i = 0; i < ns; ++i) out.dbar[sup[i]] = xs[i];
  out.distance_sq = (d - out.dbar).squaredNorm();
  out.kkt = sol.kkt;
  return out;
}

MaskLsSolution oracle_mask_projection_subspace(const CVector& d,
                                               const SpectralKernel& kernel,
                                               const MaskSpec& mask,
                                               const OracleConfig& cfg) {
  mask.validate(kernel.rows());
  if (d.size() != kernel.cols())
    throw DimensionError("vector length does not match kernel width");
  MaskLsSolution out;
  const RVector ratio = mask_ratio(d, kernel, mask);
  if (ratio.maxCoeff() < 1.0) {
    out.dbar = d;
    return out;
  }
  const int m_count = kernel.rows();
  const CMatrix gram = kernel.A * kernel.A.adjoint();
  const CVector s = kernel.A * d;
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw ConfigError("kernel Gram matrix is not positive definite");
  const CMatrix lh = llt.matrixL().adjoint();  // w^H K w = ||L^H w||^2

  OracleProblem p;
  p.objective = OracleProblem::Objective::kLeastSquares;
  p.dim = 2 * m_count;
  p.R0 = RMatrix::Zero(p.dim, p.dim);
  for (int i = 0; i < m_count; ++i)
    p.R0.block(2 * i, 0, 2, p.dim) = real_row(lh.row(i));
  p.c0 = RVector::Zero(p.dim);
  const double dn = d.squaredNorm();
  p.objective_scale = dn > 0.0 ? 1.0 / dn : 1.0;
  for (int m = 0; m < m_count; ++m) {
    const double sg = std::sqrt(mask.gamma[m]);
    QuadConstraint q;
    q.R = real_row(gram.row(m)) / sg;
    q.c = RVector(2);
    q.c << s[m].real() / sg, s[m].imag() / sg;
    q.h = 1.0;
    p.constraints.push_back(std::move(q));
  }
  p.start = to_real(llt.solve(s));
  const OracleSolution sol = logbarrier_solve(p, cfg);
  const CVector w = to_complex(sol.z);
  out.dbar = d - kernel.A.adjoint() * w;
  out.distance_sq = (d - out.dbar).squaredNorm();
  out.kkt = sol.kkt;
  return out;
}

EpigraphSolution oracle_epigraph(const CMatrix& X, const SpectralKernel& kernel,
                                 const MaskSpec& mask,
                                 const BallConstraint& ball,
                                 const OracleConfig& cfg) {
  mask.validate(kernel.rows());
  if (X.cols() != kernel.cols())
    throw DimensionError("grid width does not match kernel width");
  if (ball.center.rows() != X.rows() || ball.center.cols() != X.cols())
    throw DimensionError("EVM ball center does not match the grid");
  const bool wideband = ball.mode == BallConstraint::Mode::kWideband;
  if (!wideband && static_cast<Eigen::Index>(ball.radii.size()) != X.cols())
    throw DimensionError("per-column radii do not match the grid width");

  const int nt = static_cast<int>(X.rows());
  const int m_count = kernel.rows();
  auto max_ratio = [&](const CMatrix& G) {
    double worst = 0.0;
    for (int j = 0; j < nt; ++j)
      for (int m = 0; m < m_count; ++m)
        worst = std::max(worst, std::norm((kernel.A.row(m) *
                                           G.row(j).transpose()).value()) /
                                    mask.gamma[m]);
    return worst;
  };

  // Free columns: touched by the kernel and not pinned by a zero radius.
  std::vector<int> free_cols;
  for (int k : kernel_support(kernel)) {
    if (wideband ? ball.radius > 0.0 : ball.radii[k] != 0.0)
      free_cols.push_back(k);
  }
  EpigraphSolution out;
  out.Xbar = ball.center;
  if (free_cols.empty()) {
    out.delta_t = max_ratio(out.Xbar);
    return out;
  }
  const int nf = static_cast<int>(free_cols.size());
  if (nf > kMaxSupport)
    throw ConfigError("epigraph oracle supports at most 64 free columns");

  // Layout: antenna j owns [2*nf*j, 2*nf*(j+1)), real parts first.
  const int dim = 2 * nf * nt;
  auto re_idx = [&](int j, int i) { return 2 * nf * j + i; };
  auto im_idx = [&](int j, int i) { return 2 * nf * j + nf + i; };

  // Contribution of pinned columns to a_m^T x_j.
  CMatrix fixed = CMatrix::Zero(m_count, nt);
  {
    CMatrix pinned = ball.center;
    for (int k : free_cols) pinned.col(k).setZero();
    fixed = kernel.A * pinned.transpose();
  }

  OracleProblem p;
  p.objective = OracleProblem::Objective::kEpigraph;
  p.dim = dim;
  RVector center(dim);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nf; ++i) {
      center[re_idx(j, i)] = ball.center(j, free_cols[i]).real();
      center[im_idx(j, i)] = ball.center(j, free_cols[i]).imag();
    }
  for (int j = 0; j < nt; ++j) {
    for (int m = 0; m < m_count; ++m) {
      Eigen::RowVectorXcd row(nf);
      for (int i = 0; i < nf; ++i) row[i] = kernel.A(m, free_cols[i]);
      const RMatrix blk = real_row(row);
      const double sg = std::sqrt(mask.gamma[m]);
      QuadConstraint q;
      q.R = RMatrix::Zero(2, dim);
      q.R.block(0, 2 * nf * j, 2, 2 * nf) = blk / sg;
      q.c = RVector(2);
      q.c << -fixed(m, j).real() / sg, -fixed(m, j).imag() / sg;
      q.h = 0.0;
      q.t_coeff = 1.0;
      p.constraints.push_back(std::move(q));
    }
  }
  if (wideband) {
    // Columns outside the kernel support sit at the center and add nothing.
    QuadConstraint q;
    q.R = RMatrix::Identity(dim, dim);
    q.c = center;
    q.h = ball.radius * ball.radius;
    p.constraints.push_back(std::move(q));
  } else {
    for (int i = 0; i < nf; ++i) {
      const double r = ball.radii[free_cols[i]];
      if (r < 0.0) continue;
      QuadConstraint q;
      q.R = RMatrix::Zero(2 * nt, dim);
      q.c = RVector(2 * nt);
      for (int j = 0; j < nt; ++j) {
        q.R(2 * j, re_idx(j, i)) = 1.0;
        q.R(2 * j + 1, im_idx(j, i)) = 1.0;
        q.c[2 * j] = center[re_idx(j, i)];
        q.c[2 * j + 1] = center[im_idx(j, i)];
      }
      q.h = r * r;
      p.constraints.push_back(std::move(q));
    }
  }
  if (p.constraints.size() > 64)
    throw ConfigError("epigraph oracle instance has too many constraints");
  p.start = center;
  p.t_start = 2.0 * max_ratio(ball.center) + 1e-3;

  const OracleSolution sol = logbarrier_solve(p, cfg);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nf; ++i)
      out.Xbar(j, free_cols[i]) =
          Complex(sol.z[re_idx(j, i)], sol.z[im_idx(j, i)]);
  out.delta_t = sol.t;
  out.kkt = sol.kkt;
  return out;
}

CVector bisection_rank1_oracle(const CVector& x, const CVector& u, double b) {
  if (x.size() != u.size()) throw DimensionError("x and u differ in length");
  if (!(b > 0.0))
    throw ConfigError("bisection oracle needs b > 0; b = 0 is the notch case");
  const double un = u.squaredNorm();
  if (un == 0.0) throw DegenerateConstraintError("u is zero");
  const Complex ux = u.dot(x);
  const double p0 = std::norm(ux);
  if (!(p0 > b)) throw ConfigError("bisection oracle needs |u^H x|^2 > b");

  // |u^H z(mu)|^2 = p0 / (1 + mu ||u||^2)^2, decreasing in mu.
  auto g = [&](double mu) {
    const double den = 1.0 + mu * un;
    return p0 / (den * den);
  };
  double lo = 0.0, hi = 1.0 / un;
  while (g(hi) > b) hi *= 2.0;
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    mu = 0.5 * (lo + hi);
    const double gm = g(mu);
    if (std::fabs(gm - b) <= 1e-12) break;
    if (gm > b) lo = mu; else hi = mu;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return x - (mu / (1.0 + mu * un)) * u * ux;
}

}  // namespace specprec
