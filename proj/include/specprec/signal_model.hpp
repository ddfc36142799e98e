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

#include <cstdint>
#include <string>
#include <vector>

#include "specprec/types.hpp"

namespace specprec {

// Time/frequency geometry of a CP-OFDM symbol. Active subcarriers are FFT
// bins in [0, N); negative frequencies live in the upper half.
struct OfdmNumerology {
  int fft_size = 0;
  int cp_len = 0;
  double scs_hz = 15e3;
  std::vector<int> active_set;
  int prb_size = 12;

  // Throws ConfigError.
  void validate() const;
  void validate_prb_layout() const;

  int symbol_length() const { return fft_size + cp_len; }
  int num_active() const { return static_cast<int>(active_set.size()); }

  // Signed subcarrier offset of FFT bin k, in (-N/2, N/2].
  int signed_index(int bin) const;

  // Contiguous block of `count` subcarriers starting at signed offset
  // `first` (e.g. first=-150, count=300 for 25 PRBs around DC).
  static OfdmNumerology contiguous(int fft_size, int cp_len, double scs_hz,
                                   int first, int count, int prb_size = 12);
};

// Kernel frequency points in subcarrier units (Hz / scs).
struct FrequencyGrid {
  std::vector<double> points;

  int size() const { return static_cast<int>(points.size()); }
  static FrequencyGrid from_hz(const std::vector<double>& hz, double scs_hz);
};

struct SpectralKernel {
  CMatrix A;  // M x N
  FrequencyGrid freqs;
  RVector row_norms_sq;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
  // a(nu_m) as a column vector.
  CVector row(int m) const { return A.row(m).transpose(); }
};

// Leakage of unit symbol on bin k observed at frequency nu.
Complex kernel_entry(int fft_size, int cp_len, double nu, double k);

SpectralKernel build_kernel(const OfdmNumerology& num,
                            const FrequencyGrid& freqs);

// Same kernel with every column outside the active set zeroed. The solvers
// use this form so that precoding never places energy on idle bins.
SpectralKernel restrict_to_active(const SpectralKernel& kernel,
                                  const OfdmNumerology& num);

enum class Constellation { kQpsk, kQam16, kQam64, kQam256 };

Constellation parse_constellation(const std::string& name);
std::string constellation_name(Constellation c);
int bits_per_symbol(Constellation c);

// N_T x N frequency-domain symbols; rows are the per-antenna vectors d_j.
struct DataGrid {
  CMatrix X;
  OfdmNumerology numerology;

  int antennas() const { return static_cast<int>(X.rows()); }
};

// Counter-based stream derivation: symbol `index` of a run seeded with
// `master` can be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

DataGrid generate_qam_grid(std::uint64_t seed, const OfdmNumerology& num,
                           int n_tx, Constellation constellation);

// One row per antenna, N + N_CP samples each, 1/sqrt(N) IDFT scaling with
// the cyclic prefix in front.
CMatrix synthesize_time_signal(const DataGrid& grid);

}  // namespace specprec
