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

#include <vector>

#include "specprec/signal_model.hpp"
#include "specprec/types.hpp"

namespace specprec {

// Per-point bounds on |a(nu_m)^T d|^2 in kernel units. mask_db and
// reference_db are kept for reporting only.
struct MaskSpec {
  std::vector<double> gamma;
  std::vector<double> mask_db;
  double reference_db = 0.0;

  void validate(int rows) const;
  int size() const { return static_cast<int>(gamma.size()); }
};

RVector oobe_power(const CVector& d, const SpectralKernel& kernel);
RVector mask_ratio(const CVector& d, const SpectralKernel& kernel,
                   const MaskSpec& mask);
double max_mask_ratio(const CMatrix& X, const SpectralKernel& kernel,
                      const MaskSpec& mask);

// Sum over all points and antennas of |a(nu_m)^T x_j|^2.
double total_oobe(const CMatrix& X, const SpectralKernel& kernel);

// Unequalized EVM figures. Scopes whose reference power is zero are marked
// invalid and carry NaN.
struct EvmReport {
  std::vector<double> per_antenna;
  double pooled = 0.0;
  std::vector<double> per_subcarrier;  // indexed by FFT bin
  std::vector<bool> subcarrier_valid;
  std::vector<double> per_prb;  // PRB p covers active_set[p*12 .. p*12+11]
};

EvmReport evm_metrics(const CMatrix& X, const CMatrix& Xbar,
                      const OfdmNumerology& num);
double evm_wideband(const CMatrix& X, const CMatrix& Xbar);

// Occupied-band frequency points with spacing 1/oversample subcarriers,
// covering [first - 1/2, last + 1/2) of a contiguous active block.
std::vector<double> occupied_band_points(const OfdmNumerology& num,
                                         int oversample);

// Expected |a(nu)^T d|^2 averaged across the occupied band for i.i.d.
// unit-power symbols on the active set. This is the kernel-domain level that
// corresponds to the configured in-band reference density.
double unit_power_reference(const OfdmNumerology& num, int oversample);

// gamma_m = 10^((mask_db[m] - reference_db)/10) * unit_reference.
MaskSpec calibrate_mask(const std::vector<double>& mask_db,
                        double reference_db, double unit_reference);

struct PsdConfig {
  int oversample = 4;          // FFT length = oversample * N
  double reference_db = -21.5; // density of the unit-power reference
  double unit_reference = 1.0; // kernel-domain level mapped to reference_db
};

struct PsdEstimate {
  std::vector<double> nu;        // subcarrier units, ascending
  std::vector<double> freq_hz;   // nu * scs
  std::vector<double> power;     // mean |DTFT|^2 per symbol and antenna
  std::vector<double> density_db;
  int oversample = 0;
  long long segments = 0;

  // Mean power over bins whose nu lies in [lo, hi).
  double mean_power(double nu_lo, double nu_hi) const;
  // Power at the bin nearest to nu.
  double power_at(double nu) const;
};

// Accumulates rectangular-window periodograms of CP-OFDM symbols. Feeding
// symbols in a fixed order gives bit-identical results.
class PsdAccumulator {
 public:
  PsdAccumulator(const OfdmNumerology& num, PsdConfig cfg);

  // `samples` holds one row per antenna with a whole number of symbols.
  void add(const CMatrix& samples);
  void merge(const PsdAccumulator& other);
  PsdEstimate finish() const;

  // Periodogram of a single symbol (sum over antennas), length oversample*N
  // in FFT bin order.
  std::vector<double> symbol_periodogram(const CMatrix& samples) const;
  void add_periodogram(const std::vector<double>& p, long long segments);

 private:
  OfdmNumerology num_;
  PsdConfig cfg_;
  std::vector<double> acc_;
  long long segments_ = 0;
};

PsdEstimate psd_estimate(const CMatrix& samples, const OfdmNumerology& num,
                         const PsdConfig& cfg);

struct AclrResult {
  double lower_db = 0.0;
  double upper_db = 0.0;
  double worst_db = 0.0;
};

// Integrated in-band power over each adjacent channel. Channels are
// [center +/- bandwidth/2] shifted by +/- spacing.
AclrResult aclr(const PsdEstimate& psd, double bandwidth_hz,
                double spacing_hz, double center_hz = 0.0);

}  // namespace specprec
