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

#include "specprec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/FFT>

namespace specprec {

void MaskSpec::validate(int rows) const {
  if (size() != rows)
    throw DimensionError("mask has " + std::to_string(size()) +
                         " bounds but the kernel has " +
                         std::to_string(rows) + " rows");
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g))
      throw ConfigError("mask bounds must be positive and finite");
}

RVector oobe_power(const CVector& d, const SpectralKernel& kernel) {
  if (d.size() != kernel.cols())
    throw DimensionError("vector length does not match kernel width");
  return (kernel.A * d).cwiseAbs2();
}

RVector mask_ratio(const CVector& d, const SpectralKernel& kernel,
                   const MaskSpec& mask) {
  mask.validate(kernel.rows());
  RVector p = oobe_power(d, kernel);
  for (int m = 0; m < p.size(); ++m) p[m] /= mask.gamma[m];
  return p;
}

double max_mask_ratio(const CMatrix& X, const SpectralKernel& kernel,
                      const MaskSpec& mask) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.rows(); ++j)
    worst = std::max(worst,
                     mask_ratio(X.row(j).transpose(), kernel, mask).maxCoeff());
  return worst;
}

double total_oobe(const CMatrix& X, const SpectralKernel& kernel) {
  if (X.cols() != kernel.cols())
    throw DimensionError("grid width does not match kernel width");
  return (kernel.A * X.transpose()).squaredNorm();
}

double evm_wideband(const CMatrix& X, const CMatrix& Xbar) {
  if (X.rows() != Xbar.rows() || X.cols() != Xbar.cols())
    throw DimensionError("EVM operands differ in shape");
  const double ref = X.norm();
  if (ref == 0.0) throw ConfigError("EVM reference has zero power");
  return (Xbar - X).norm() / ref;
}

EvmReport evm_metrics(const CMatrix& X, const CMatrix& Xbar,
                      const OfdmNumerology& num) {
  if (X.rows() != Xbar.rows() || X.cols() != Xbar.cols())
    throw DimensionError("EVM operands differ in shape");
  if (X.cols() != num.fft_size)
    throw DimensionError("grid width does not match fft_size");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const CMatrix err = Xbar - X;
  EvmReport r;
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const double ref = X.row(j).norm();
    r.per_antenna.push_back(ref > 0.0 ? err.row(j).norm() / ref : nan);
  }
  const double total = X.norm();
  r.pooled = total > 0.0 ? err.norm() / total : nan;
  r.per_subcarrier.assign(num.fft_size, nan);
  r.subcarrier_valid.assign(num.fft_size, false);
  for (int k = 0; k < num.fft_size; ++k) {
    const double ref = X.col(k).norm();
    if (ref > 0.0) {
      r.per_subcarrier[k] = err.col(k).norm() / ref;
      r.subcarrier_valid[k] = true;
    }
  }
  const int prbs = num.num_active() / num.prb_size;
  for (int p = 0; p < prbs; ++p) {
    double e = 0.0, s = 0.0;
    for (int i = 0; i < num.prb_size; ++i) {
      const int k = num.active_set[p * num.prb_size + i];
      e += err.col(k).squaredNorm();
      s += X.col(k).squaredNorm();
    }
    r.per_prb.push_back(s > 0.0 ? std::sqrt(e / s) : nan);
  }
  return r;
}

std::vector<double> occupied_band_points(const OfdmNumerology& num,
                                         int oversample) {
  if (oversample < 1) throw ConfigError("oversample must be >= 1");
  std::vector<double> pts;
  pts.reserve(num.active_set.size() * oversample);
  for (int k : num.active_set) {
    const int s = num.signed_index(k);
    for (int i = 0; i < oversample; ++i)
      pts.push_back(s - 0.5 + static_cast<double>(i) / oversample);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

double unit_power_reference(const OfdmNumerology& num, int oversample) {
  num.validate();
  if (num.active_set.empty()) throw ConfigError("active set is empty");
  const std::vector<double> pts = occupied_band_points(num, oversample);
  double acc = 0.0;
  for (double nu : pts) {
    double row = 0.0;
    for (int k : num.active_set)
      row += std::norm(kernel_entry(num.fft_size, num.cp_len, nu, k));
    acc += row;
  }
  return acc / static_cast<double>(pts.size());
}

MaskSpec calibrate_mask(const std::vector<double>& mask_db,
                        double reference_db, double unit_reference) {
  if (!(unit_reference > 0.0))
    throw ConfigError("calibration reference must be positive");
  MaskSpec mask;
  mask.mask_db = mask_db;
  mask.reference_db = reference_db;
  for (double db : mask_db)
    mask.gamma.push_back(std::pow(10.0, (db - reference_db) / 10.0) *
                         unit_reference);
  return mask;
}

// ---------------------------------------------------------------------------

double PsdEstimate::mean_power(double nu_lo, double nu_hi) const {
  double acc = 0.0;
  long n = 0;
  for (size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] >= nu_lo && nu[i] < nu_hi) {
      acc += power[i];
      ++n;
    }
  }
  if (n == 0) throw ConfigError("no PSD bins in the requested range");
  return acc / static_cast<double>(n);
}

double PsdEstimate::power_at(double target) const {
  if (nu.empty()) throw ConfigError("empty PSD");
  auto it = std::lower_bound(nu.begin(), nu.end(), target);
  size_t i = static_cast<size_t>(it - nu.begin());
  if (i == nu.size()) --i;
  if (i > 0 && std::fabs(nu[i - 1] - target) < std::fabs(nu[i] - target)) --i;
  return power[i];
}

PsdAccumulator::PsdAccumulator(const OfdmNumerology& num, PsdConfig cfg)
    : num_(num), cfg_(cfg) {
  num_.validate();
  if (cfg_.oversample < 1) throw ConfigError("oversample must be >= 1");
  if (static_cast<long>(cfg_.oversample) * num_.fft_size <
      num_.symbol_length())
    throw ConfigError("oversample too small to hold a CP-OFDM symbol");
  acc_.assign(static_cast<size_t>(cfg_.oversample) * num_.fft_size, 0.0);
}

std::vector<double> PsdAccumulator::symbol_periodogram(
    const CMatrix& samples) const {
  const int len = num_.symbol_length();
  if (samples.cols() % len != 0 || samples.cols() == 0)
    throw DimensionError("sample count is not a whole number of symbols");
  const size_t fft_len = acc_.size();
  std::vector<double> out(fft_len, 0.0);
  std::vector<Complex> seg(fft_len), spec(fft_len);
  Eigen::FFT<double> fft;
  for (Eigen::Index j = 0; j < samples.rows(); ++j) {
    for (Eigen::Index s = 0; s < samples.cols(); s += len) {
      std::fill(seg.begin(), seg.end(), Complex(0.0, 0.0));
      for (int i = 0; i < len; ++i) seg[i] = samples(j, s + i);
      fft.fwd(spec, seg);
      for (size_t i = 0; i < fft_len; ++i) out[i] += std::norm(spec[i]);
    }
  }
  return out;
}

void PsdAccumulator::add_periodogram(const std::vector<double>& p,
                                     long long segments) {
  if (p.size() != acc_.size())
    throw DimensionError("periodogram length mismatch");
  for (size_t i = 0; i < acc_.size(); ++i) acc_[i] += p[i];
  segments_ += segments;
}

void PsdAccumulator::add(const CMatrix& samples) {
  const long long segs =
      static_cast<long long>(samples.rows()) *
      (samples.cols() / std::max(1, num_.symbol_length()));
  add_periodogram(symbol_periodogram(samples), segs);
}

void PsdAccumulator::merge(const PsdAccumulator& other) {
  add_periodogram(other.acc_, other.segments_);
}

PsdEstimate PsdAccumulator::finish() const {
  if (segments_ == 0) throw ConfigError("PSD needs at least one symbol");
  const long fft_len = static_cast<long>(acc_.size());
  const double p = cfg_.oversample;
  PsdEstimate est;
  est.oversample = cfg_.oversample;
  est.segments = segments_;
  est.nu.reserve(fft_len);
  // Ascending frequency: negative half first.
  for (long r = 0; r < fft_len; ++r) {
    const long i = (r + fft_len / 2) % fft_len;
    const long signed_bin = i >= (fft_len + 1) / 2 ? i - fft_len : i;
    const double pw = acc_[i] / static_cast<double>(segments_);
    est.nu.push_back(signed_bin / p);
    est.freq_hz.push_back(signed_bin / p * num_.scs_hz);
    est.power.push_back(pw);
    est.density_db.push_back(
        cfg_.reference_db + 10.0 * std::log10(std::max(pw, 1e-300) /
                                              cfg_.unit_reference));
  }
  return est;
}

PsdEstimate psd_estimate(const CMatrix& samples, const OfdmNumerology& num,
                         const PsdConfig& cfg) {
  if (samples.cols() < num.symbol_length())
    throw ConfigError("PSD needs at least one full OFDM symbol");
  PsdAccumulator acc(num, cfg);
  acc.add(samples);
  return acc.finish();
}

AclrResult aclr(const PsdEstimate& psd, double bandwidth_hz,
                double spacing_hz, double center_hz) {
  if (psd.freq_hz.empty()) throw ConfigError("empty PSD");
  if (!(bandwidth_hz > 0.0) || !(spacing_hz > 0.0))
    throw ConfigError("ACLR bandwidth and spacing must be positive");
  const double lo_edge = center_hz - spacing_hz - bandwidth_hz / 2;
  const double hi_edge = center_hz + spacing_hz + bandwidth_hz / 2;
  if (psd.freq_hz.front() > lo_edge || psd.freq_hz.back() < hi_edge - 1e-9 *
                                           std::fabs(hi_edge))
    throw ConfigError("PSD span too narrow for the ACLR channels");
  auto integrate = [&](double c) {
    double acc = 0.0;
    for (size_t i = 0; i < psd.freq_hz.size(); ++i) {
      const double f = psd.freq_hz[i];
      if (f >= c - bandwidth_hz / 2 && f < c + bandwidth_hz / 2)
        acc += psd.power[i];
    }
    return acc;
  };
  const double in = integrate(center_hz);
  const double lower = integrate(center_hz - spacing_hz);
  const double upper = integrate(center_hz + spacing_hz);
  AclrResult r;
  r.lower_db = 10.0 * std::log10(in / lower);
  r.upper_db = 10.0 * std::log10(in / upper);
  r.worst_db = std::min(r.lower_db, r.upper_db);
  return r;
}

}  // namespace specprec
