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
#include <random>

#include "doctest.h"
#include "specprec/oracle.hpp"
#include "specprec/projections.hpp"
#include "test_util.hpp"

using namespace specprec;

namespace {

double constraint_value(const CVector& x, const CVector& u) {
  return std::norm(u.dot(x));  // Eigen dot conjugates the left operand
}

}  // namespace

TEST_CASE("rank-1 projection matches a conic solver") {
  CVector x(4), u(4);
  for (int k = 0; k < 4; ++k) {
    x[k] = Complex(std::cos(1.3 * k + 0.2), std::sin(0.7 * k * k - 0.4));
    u[k] = Complex(0.5 + 0.1 * k, std::cos(2.1 * k));
  }
  CHECK(constraint_value(x, u) == doctest::Approx(3.8067518558899573));
  const CVector p = project_rank1(x, {u, 0.1});
  // cvxpy / Clarabel, tests/oracles/gen_reference.py
  const Complex want[4] = {{1.0275611066308565, 0.039567664541003335},
                           {0.35549599538000826, 0.19283097175782762},
                           {-0.62319346130191755, 0.59141641802001277},
                           {-0.41865454663831192, 0.095137775921809969}};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(p[k] - want[k]) < 1e-7);
  CHECK(constraint_value(p, u) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("feasible and boundary inputs are returned unchanged") {
  std::mt19937_64 rng(5);
  const CVector u = testing::random_cvector(rng, 8);
  const CVector x = testing::random_cvector(rng, 8);
  const double v = constraint_value(x, u);
  CHECK(project_rank1(x, {u, v * 2}) == x);
  CHECK(project_rank1(x, {u, v}) == x);
}

TEST_CASE("b = 0 gives the orthogonal complement") {
  std::mt19937_64 rng(6);
  const CVector u = testing::random_cvector(rng, 16);
  const CVector x = testing::random_cvector(rng, 16);
  const CVector p = project_rank1(x, {u, 0.0});
  CHECK(std::abs(u.dot(p)) < 1e-12 * x.norm() * u.norm());
  const CVector expect = x - u * (u.dot(x) / u.squaredNorm());
  CHECK((p - expect).norm() < 1e-12);
}

TEST_CASE("projection properties on random instances") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.01, 0.9);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = trial % 3 == 0 ? 4 : (trial % 3 == 1 ? 8 : 64);
    const CVector u = testing::random_cvector(rng, n);
    const CVector x = testing::random_cvector(rng, n);
    const CVector y = testing::random_cvector(rng, n);
    const double b = unif(rng) * constraint_value(x, u);
    const Rank1Constraint c{u, b};
    const CVector px = project_rank1(x, c);
    const CVector py = project_rank1(y, c);
    // Tight when infeasible.
    CHECK(constraint_value(px, u) == doctest::Approx(b).epsilon(1e-9));
    // Idempotent.
    CHECK((project_rank1(px, c) - px).norm() <= 1e-12 * (1 + px.norm()));
    // Nonexpansive.
    CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
    // Variational inequality against random feasible points.
    for (int s = 0; s < 5; ++s) {
      const CVector w = project_rank1(testing::random_cvector(rng, n, 2.0), c);
      const double vi = ((x - px).dot(w - px)).real();
      CHECK(vi <= 1e-9 * (1 + x.squaredNorm()));
    }
    // Agrees with the bisection oracle.
    const CVector pb = bisection_rank1_oracle(x, u, b);
    CHECK((pb - px).norm() <= 1e-8 * (1 + x.norm()));
  }
}

TEST_CASE("rank-1 constraint validation") {
  CHECK_THROWS_AS(project_rank1(CVector::Ones(3), {CVector::Zero(3), 1.0}),
                  DegenerateConstraintError);
  CHECK_THROWS_AS(project_rank1(CVector::Ones(3), {CVector::Ones(3), -1.0}),
                  ConfigError);
  CHECK_THROWS_AS(project_rank1(CVector::Ones(3), {CVector::Ones(4), 1.0}),
                  DimensionError);
}

TEST_CASE("Frobenius ball projection") {
  std::mt19937_64 rng(2);
  CMatrix c = CMatrix::Zero(2, 5);
  c.row(0) = testing::random_cvector(rng, 5).transpose();
  CMatrix x = c;
  x.row(1) = testing::random_cvector(rng, 5).transpose();
  BallConstraint b;
  b.center = c;
  b.radius = 0.5 * (x - c).norm();
  const CMatrix p = project_frobenius_ball(x, b);
  CHECK((p - c).norm() == doctest::Approx(b.radius).epsilon(1e-12));
  // Radial: p - c is parallel to x - c.
  CHECK(((p - c) - 0.5 * (x - c)).norm() < 1e-12);
  b.radius = 2.0 * (x - c).norm();
  CHECK(project_frobenius_ball(x, b) == x);
  b.radius = 0.0;
  CHECK((project_frobenius_ball(x, b) - c).norm() < 1e-15);
}

TEST_CASE("per-column ball projection") {
  std::mt19937_64 rng(3);
  CMatrix c(3, 4), x(3, 4);
  for (int k = 0; k < 4; ++k) {
    c.col(k) = testing::random_cvector(rng, 3);
    x.col(k) = testing::random_cvector(rng, 3);
  }
  BallConstraint b;
  b.mode = BallConstraint::Mode::kPerColumn;
  b.center = c;
  b.radii = {0.0, -1.0, 1e6, 0.25 * (x.col(3) - c.col(3)).norm()};
  const CMatrix p = project_ball(x, b);
  CHECK((p.col(0) - c.col(0)).norm() < 1e-15);
  CHECK(p.col(1) == x.col(1));
  CHECK(p.col(2) == x.col(2));
  CHECK((p.col(3) - c.col(3)).norm() ==
        doctest::Approx(b.radii[3]).epsilon(1e-12));
  b.radii.pop_back();
  CHECK_THROWS_AS(project_ball(x, b), DimensionError);
}
