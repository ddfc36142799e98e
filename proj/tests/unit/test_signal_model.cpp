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
#include <set>
#include <sstream>

#include "doctest.h"
#include "specprec/signal_model.hpp"
#include "specprec/waveform_io.hpp"
#include "test_util.hpp"

using namespace specprec;

namespace {

void check_close(Complex got, Complex want, double tol) {
  CHECK(std::abs(got - want) <= tol);
}

}  // namespace

TEST_CASE("kernel matches mpmath reference values") {
  // From tests/oracles/gen_reference.py (direct sum, 40 digits).
  check_close(kernel_entry(8, 2, 0.0, 0), {3.5355339059327378, 0}, 1e-14);
  check_close(kernel_entry(8, 2, 3.5, 1),
              {-0.031745634443275481, -0.1595960817392694}, 1e-15);
  check_close(kernel_entry(8, 2, -2.25, 5),
              {0.023289954908909317, -0.23646688050988368}, 1e-15);
  check_close(kernel_entry(8, 2, 4.0, 4), {3.5355339059327378, 0}, 1e-14);
  check_close(kernel_entry(8, 2, 12.0, 4), {3.5355339059327378, 0}, 1e-14);
  check_close(kernel_entry(8, 2, 1e-9, 0),
              {3.5355339059327378, -6.9420045908724474e-09}, 1e-14);
  check_close(kernel_entry(512, 36, 334.0, 0),
              {-0.045211512053782155, -0.020708395396751393}, 1e-14);
  check_close(kernel_entry(512, 36, -171.0, 300),
              {-0.063461414886571754, 0.0074321950123793371}, 1e-14);
  check_close(kernel_entry(512, 36, 170.5, 20),
              {-0.0053635295355179084, -0.013061907019931124}, 1e-14);
  // Exact nulls of the Dirichlet factor.
  CHECK(std::abs(kernel_entry(512, 36, 128.0, 0)) < 1e-13);
  CHECK(std::abs(kernel_entry(512, 36, 640.0, 0)) < 1e-13);
}

TEST_CASE("kernel is N-periodic in nu - k") {
  for (double nu : {-3.7, 0.25, 5.5})
    for (int k = 0; k < 8; ++k)
      CHECK(std::abs(kernel_entry(8, 2, nu + 8, k) - kernel_entry(8, 2, nu, k)) <
            1e-13);
}

TEST_CASE("kernel row equals the DTFT of the synthesized symbol") {
  const auto num = OfdmNumerology::contiguous(16, 4, 15e3, -4, 8, 4);
  const CVector d = testing::reference_data(num);
  const DataGrid g{d.transpose(), num};
  const CMatrix s = synthesize_time_signal(g);
  REQUIRE(s.cols() == 20);
  for (double nu : {6.5, -7.25, 0.0}) {
    FrequencyGrid fg;
    fg.points = {nu};
    const SpectralKernel k = build_kernel(num, fg);
    const Complex ad = (k.A * d)(0);
    Complex dtft(0, 0);
    for (int n = 0; n < 20; ++n)
      dtft += s(0, n) * std::polar(1.0, -2 * M_PI * nu * (n - 4) / 16.0);
    CHECK(std::abs(std::norm(ad) - std::norm(dtft)) < 1e-12 * (1 + std::norm(ad)));
  }
}

TEST_CASE("restricted kernel zeroes idle columns") {
  const auto num = OfdmNumerology::contiguous(16, 4, 15e3, -4, 8, 4);
  FrequencyGrid fg;
  fg.points = {6.5, -7.5};
  const SpectralKernel k = restrict_to_active(build_kernel(num, fg), num);
  const std::set<int> act(num.active_set.begin(), num.active_set.end());
  for (int c = 0; c < 16; ++c)
    CHECK((k.A.col(c).squaredNorm() == 0.0) == (act.count(c) == 0));
  for (int m = 0; m < 2; ++m)
    CHECK(k.row_norms_sq[m] == doctest::Approx(k.A.row(m).squaredNorm()));
}

TEST_CASE("numerology validation") {
  CHECK_THROWS_AS(OfdmNumerology::contiguous(16, 4, 15e3, -4, 20).validate(),
                  ConfigError);
  OfdmNumerology bad = OfdmNumerology::contiguous(16, 4, 15e3, -4, 8, 4);
  bad.active_set.push_back(bad.active_set.front());
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(OfdmNumerology::contiguous(16, -1, 15e3, -4, 8, 4).validate(),
                  ConfigError);
  const auto ok = OfdmNumerology::contiguous(1024, 72, 15e3, -150, 300);
  CHECK(ok.active_set.front() == 1024 - 150);
  CHECK(ok.signed_index(ok.active_set.front()) == -150);
  CHECK(ok.signed_index(ok.active_set.back()) == 149);
}

TEST_CASE("QAM grids are deterministic, unit power and on the lattice") {
  const auto num = OfdmNumerology::contiguous(64, 8, 15e3, -24, 48, 12);
  for (auto c : {Constellation::kQpsk, Constellation::kQam16,
                 Constellation::kQam64, Constellation::kQam256}) {
    const DataGrid a = generate_qam_grid(7, num, 2, c);
    const DataGrid b = generate_qam_grid(7, num, 2, c);
    CHECK(a.X == b.X);
    CHECK(generate_qam_grid(8, num, 2, c).X != a.X);
    const int side = 1 << (bits_per_symbol(c) / 2);
    const double scale = std::sqrt(2.0 * (side * side - 1) / 3.0);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 64; ++k) {
        const Complex z = a.X(j, k) * scale;
        const bool active = std::find(num.active_set.begin(),
                                      num.active_set.end(),
                                      k) != num.active_set.end();
        if (!active) {
          CHECK(z == Complex(0, 0));
          continue;
        }
        CHECK(std::fabs(std::fmod(std::fabs(z.real()), 2.0) - 1.0) < 1e-12);
        CHECK(std::fabs(std::fmod(std::fabs(z.imag()), 2.0) - 1.0) < 1e-12);
        CHECK(std::fabs(z.real()) < side);
      }
  }
  // Mean power over many symbols.
  double p = 0;
  int count = 0;
  for (int s = 0; s < 200; ++s) {
    const DataGrid g = generate_qam_grid(derive_seed(3, s), num, 1,
                                         Constellation::kQam64);
    p += g.X.squaredNorm();
    count += num.num_active();
  }
  CHECK(p / count == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 5) != derive_seed(2, 5));
}

TEST_CASE("constellation names round trip") {
  for (auto c : {Constellation::kQpsk, Constellation::kQam16,
                 Constellation::kQam64, Constellation::kQam256})
    CHECK(parse_constellation(constellation_name(c)) == c);
  CHECK_THROWS_AS(parse_constellation("8psk"), ConfigError);
}

TEST_CASE("time signal carries the cyclic prefix") {
  const auto num = OfdmNumerology::contiguous(32, 6, 15e3, -8, 16, 4);
  const DataGrid g = generate_qam_grid(1, num, 3, Constellation::kQam16);
  const CMatrix s = synthesize_time_signal(g);
  REQUIRE(s.rows() == 3);
  REQUIRE(s.cols() == 38);
  for (int j = 0; j < 3; ++j) {
    CHECK((s.row(j).head(6) - s.row(j).tail(6)).norm() < 1e-13);
    // Unitary transform: body energy equals symbol energy.
    CHECK(s.row(j).tail(32).squaredNorm() ==
          doctest::Approx(g.X.row(j).squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("waveform files round trip and reject bad headers") {
  CMatrix m(2, 3);
  m << Complex(1, -2), Complex(0.5, 0), Complex(-1e300, 1e-300),
      Complex(3, 4), Complex(-0.0, 7), Complex(M_PI, -M_E);
  std::stringstream ss;
  write_complex_matrix(ss, m);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 16 + 6 * 16);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x53);  // 'S', little-endian
  CHECK(bytes.substr(0, 4) == "SPWF");
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);
  CHECK(static_cast<unsigned char>(bytes[12]) == 3);
  std::stringstream in(bytes);
  CHECK(read_complex_matrix(in) == m);

  std::string broken = bytes;
  broken[0] = 'X';
  std::stringstream bad(broken);
  CHECK_THROWS_AS(read_complex_matrix(bad), IoError);
  std::stringstream shortened(bytes.substr(0, 40));
  CHECK_THROWS_AS(read_complex_matrix(shortened), IoError);
}
