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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace specprec {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Every failure raised by the library derives from Error. The C API maps
// each subclass onto one error code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numerology, frequency grid, mask or solver configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shapes of matrices/vectors passed together do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A rank-1 constraint with an all-zero direction.
class DegenerateConstraintError : public Error {
 public:
  using Error::Error;
};

// 1 + tr(A_k^{-1} H_k) vanished while accumulating rank-1 inverses.
class NumericalSingularityError : public Error {
 public:
  using Error::Error;
};

// The interior-point reference solver could not produce a certified point.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::string iterate_dump = {})
      : Error(what), dump_(std::move(iterate_dump)) {}
  const std::string& iterate_dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Library version, e.g. "0.3.0".
const char* version() noexcept;

}  // namespace specprec
