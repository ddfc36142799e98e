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
#include <numeric>
#include <random>

#include "doctest.h"
#include "specprec/metrics.hpp"
#include "specprec/signal_model.hpp"
#include "test_util.hpp"

using namespace specprec;

namespace {

OfdmNumerology small_num() {
  return OfdmNumerology::contiguous(16, 4, 15e3, -4, 8, 4);
}

}  // namespace

TEST_CASE("OOBE power against the direct sum") {
  const auto num = small_num();
  FrequencyGrid fg;
  fg.points = {4.5, 6.5, -7.75};
  const SpectralKernel k = build_kernel(num, fg);
  const CVector d = testing::reference_data(num);
  const RVector p = oobe_power(d, k);
  for (int m = 0; m < 3; ++m) {
    Complex acc(0, 0);
    for (int c = 0; c < 16; ++c)
      acc += testing::kernel_direct(16, 4, fg.points[m], c) * d[c];
    CHECK(p[m] == doctest::Approx(std::norm(acc)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(oobe_power(CVector::Zero(8), k), DimensionError);
}

TEST_CASE("mask ratio scales quadratically") {
  const auto num = small_num();
  FrequencyGrid fg;
  fg.points = {4.5, 6.5};
  const SpectralKernel k = build_kernel(num, fg);
  MaskSpec mask;
  mask.gamma = {0.01, 0.002};
  const CVector d = testing::reference_data(num);
  const RVector r1 = mask_ratio(d, k, mask);
  const RVector r3 = mask_ratio(Complex(0, 3) * d, k, mask);
  for (int m = 0; m < 2; ++m)
    CHECK(r3[m] == doctest::Approx(9 * r1[m]).epsilon(1e-12));
  MaskSpec bad;
  bad.gamma = {0.01};
  CHECK_THROWS_AS(mask_ratio(d, k, bad), DimensionError);
  bad.gamma = {0.01, -1.0};
  CHECK_THROWS_AS(mask_ratio(d, k, bad), ConfigError);
}

TEST_CASE("total OOBE sums antennas and points") {
  const auto num = small_num();
  FrequencyGrid fg;
  fg.points = {4.5, 6.5};
  const SpectralKernel k = build_kernel(num, fg);
  const CMatrix x = testing::reference_grid2(num);
  const double want = oobe_power(x.row(0).transpose(), k).sum() +
                      oobe_power(x.row(1).transpose(), k).sum();
  CHECK(total_oobe(x, k) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("EVM reports") {
  const auto num = small_num();
  const CMatrix x = testing::reference_grid2(num);
  CMatrix y = x;
  const int k0 = num.active_set[0];
  y(0, k0) += Complex(0.1, 0);
  y(1, k0) += Complex(0, -0.2);
  const EvmReport r = evm_metrics(x, y, num);
  CHECK(r.per_antenna[0] == doctest::Approx(0.1 / x.row(0).norm()));
  CHECK(r.per_antenna[1] == doctest::Approx(0.2 / x.row(1).norm()));
  CHECK(r.pooled == doctest::Approx(std::sqrt(0.05) / x.norm()));
  CHECK(r.pooled == doctest::Approx(evm_wideband(x, y)));
  CHECK(r.per_subcarrier[k0] == doctest::Approx(std::sqrt(0.05) / x.col(k0).norm()));
  // Idle bins have no reference.
  CHECK_FALSE(r.subcarrier_valid[8]);
  CHECK(std::isnan(r.per_subcarrier[8]));
  REQUIRE(r.per_prb.size() == 2);
  CHECK(r.per_prb[1] == 0.0);
  double s = 0;
  for (int i = 0; i < 4; ++i) s += x.col(num.active_set[i]).squaredNorm();
  CHECK(r.per_prb[0] == doctest::Approx(std::sqrt(0.05 / s)));
  CHECK_THROWS_AS(evm_wideband(CMatrix::Zero(1, 16), x.topRows(1)), ConfigError);
  CHECK_THROWS_AS(evm_metrics(x, x.topRows(1), num), DimensionError);
}

TEST_CASE("unit power reference matches the direct sum") {
  // Mean of sum_k |a(nu, k)|^2 over the occupied band, 4 points per bin.
  CHECK(unit_power_reference(small_num(), 4) ==
        doctest::Approx(19.256053023457774).epsilon(1e-12));
  const auto pts = occupied_band_points(small_num(), 4);
  CHECK(pts.size() == 32);
  CHECK(pts.front() == -4.5);
  CHECK(pts.back() == 3.25);
}

TEST_CASE("mask calibration") {
  const MaskSpec m = calibrate_mask({-75, -65, -21.5}, -21.5, 2.0);
  CHECK(m.gamma[0] == doctest::Approx(2.0 * std::pow(10.0, -5.35)));
  CHECK(m.gamma[1] == doctest::Approx(2.0 * std::pow(10.0, -4.35)));
  CHECK(m.gamma[2] == doctest::Approx(2.0));
  CHECK(m.mask_db.size() == 3);
  CHECK_THROWS_AS(calibrate_mask({-75}, -21.5, 0.0), ConfigError);
}

TEST_CASE("periodogram bins equal the kernel power") {
  const auto num = small_num();
  const DataGrid g{testing::reference_grid2(num), num};
  const CMatrix s = synthesize_time_signal(g);
  PsdConfig cfg;
  cfg.oversample = 4;
  const PsdEstimate est = psd_estimate(s, num, cfg);
  CHECK(est.segments == 2);
  CHECK(est.nu.size() == 64);
  for (double nu : {-7.75, -2.0, 0.25, 5.5}) {
    FrequencyGrid fg;
    fg.points = {nu};
    const SpectralKernel k = build_kernel(num, fg);
    const double want = 0.5 * (oobe_power(g.X.row(0).transpose(), k)[0] +
                               oobe_power(g.X.row(1).transpose(), k)[0]);
    CHECK(est.power_at(nu) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("PSD obeys Parseval") {
  std::mt19937_64 rng(5);
  const auto num = OfdmNumerology::contiguous(64, 16, 15e3, -20, 40, 4);
  PsdAccumulator acc(num, {});
  double energy = 0;
  for (int s = 0; s < 20; ++s) {
    const DataGrid g = generate_qam_grid(s, num, 1, Constellation::kQpsk);
    const CMatrix t = synthesize_time_signal(g);
    energy += t.squaredNorm();
    acc.add(t);
  }
  const PsdEstimate est = acc.finish();
  const double mean = std::accumulate(est.power.begin(), est.power.end(), 0.0) /
                      static_cast<double>(est.power.size());
  CHECK(mean == doctest::Approx(energy / 20).epsilon(0.01));
}

TEST_CASE("PSD accumulators merge") {
  const auto num = small_num();
  const DataGrid g{testing::reference_grid2(num), num};
  const CMatrix s = synthesize_time_signal(g);
  PsdAccumulator a(num, {}), b(num, {}), whole(num, {});
  a.add(s.topRows(1));
  b.add(s.bottomRows(1));
  a.merge(b);
  whole.add(s);
  const PsdEstimate x = a.finish(), y = whole.finish();
  for (size_t i = 0; i < x.power.size(); ++i)
    CHECK(x.power[i] == doctest::Approx(y.power[i]).epsilon(1e-12));
  CHECK_THROWS_AS(PsdAccumulator(num, {}).finish(), ConfigError);
}

TEST_CASE("ACLR on a synthetic spectrum") {
  PsdEstimate psd;
  for (int i = -200; i < 200; ++i) {
    const double f = i * 50e3;
    psd.freq_hz.push_back(f);
    psd.nu.push_back(f / 15e3);
    double p = 1.0;
    if (f < -2.5e6) p = 1e-3;
    if (f >= 2.5e6) p = 1e-4;
    psd.power.push_back(p);
  }
  const AclrResult r = aclr(psd, 4.5e6, 5e6);
  CHECK(r.lower_db == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(r.upper_db == doctest::Approx(40.0).epsilon(1e-9));
  CHECK(r.worst_db == r.lower_db);
  CHECK_THROWS_AS(aclr(psd, 4.5e6, 9e6), ConfigError);
  CHECK_THROWS_AS(aclr(psd, -1.0, 5e6), ConfigError);
}
