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

#include "specprec/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <unsupported/Eigen/FFT>

namespace specprec {

namespace {

constexpr long double kPi = 3.141592653589793238462643383279502884L;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Gray-coded PAM level in {-(L-1), ..., L-1} for an index of `bits` bits.
int gray_pam(unsigned gray, int bits) {
  unsigned b = gray;
  for (unsigned shift = 1; shift < static_cast<unsigned>(bits); shift <<= 1)
    b ^= b >> shift;
  const int levels = 1 << bits;
  return 2 * static_cast<int>(b) - (levels - 1);
}

}  // namespace

void OfdmNumerology::validate() const {
  if (fft_size <= 0) throw ConfigError("fft_size must be positive");
  if (cp_len <= 0 || cp_len >= fft_size)
    throw ConfigError("cp_len must satisfy 0 < cp_len < fft_size");
  if (!(scs_hz > 0.0)) throw ConfigError("scs_hz must be positive");
  if (prb_size <= 0) throw ConfigError("prb_size must be positive");
  std::set<int> seen;
  for (int k : active_set) {
    if (k < 0 || k >= fft_size)
      throw ConfigError("active subcarrier " + std::to_string(k) +
                        " outside [0, fft_size)");
    if (!seen.insert(k).second)
      throw ConfigError("duplicate active subcarrier " + std::to_string(k));
  }
}

void OfdmNumerology::validate_prb_layout() const {
  validate();
  if (active_set.empty() || active_set.size() % prb_size != 0)
    throw ConfigError("active subcarrier count " +
                      std::to_string(active_set.size()) +
                      " is not a multiple of prb_size " +
                      std::to_string(prb_size));
}

int OfdmNumerology::signed_index(int bin) const {
  return bin > fft_size / 2 ? bin - fft_size : bin;
}

OfdmNumerology OfdmNumerology::contiguous(int fft_size, int cp_len,
                                          double scs_hz, int first, int count,
                                          int prb_size) {
  OfdmNumerology num;
  num.fft_size = fft_size;
  num.cp_len = cp_len;
  num.scs_hz = scs_hz;
  num.prb_size = prb_size;
  if (fft_size <= 0 || count <= 0 || count > fft_size)
    throw ConfigError("active block does not fit in the FFT");
  num.active_set.reserve(count);
  for (int i = 0; i < count; ++i) {
    int k = (first + i) % fft_size;
    if (k < 0) k += fft_size;
    num.active_set.push_back(k);
  }
  num.validate();
  return num;
}

FrequencyGrid FrequencyGrid::from_hz(const std::vector<double>& hz,
                                     double scs_hz) {
  if (!(scs_hz > 0.0)) throw ConfigError("scs_hz must be positive");
  FrequencyGrid g;
  g.points.reserve(hz.size());
  for (double f : hz) g.points.push_back(f / scs_hz);
  return g;
}

Complex kernel_entry(int fft_size, int cp_len, double nu, double k) {
  const long double n = fft_size;
  const long double len = fft_size + cp_len;
  // The entry is N-periodic in (nu - k); reduce to (-N/2, N/2] so the sine
  // arguments stay small.
  long double x = std::fmod(static_cast<long double>(nu) - k, n);
  if (x > n / 2) x -= n;
  if (x <= -n / 2) x += n;
  const long double scale = 1.0L / std::sqrt(n);
  if (std::fabs(x) < 1e-13L) return Complex(static_cast<double>(len * scale), 0.0);
  const long double phase = kPi * x * (cp_len - n + 1) / n;
  const long double ratio =
      std::sin(kPi * x * len / n) / std::sin(kPi * x / n);
  const long double mag = scale * ratio;
  return Complex(static_cast<double>(mag * std::cos(phase)),
                 static_cast<double>(mag * std::sin(phase)));
}

SpectralKernel build_kernel(const OfdmNumerology& num,
                            const FrequencyGrid& freqs) {
  num.validate();
  if (freqs.points.empty()) throw ConfigError("frequency grid is empty");
  for (double v : freqs.points)
    if (!std::isfinite(v)) throw ConfigError("non-finite frequency point");
  const int m_count = freqs.size();
  const int n = num.fft_size;
  SpectralKernel kernel;
  kernel.freqs = freqs;
  kernel.A.resize(m_count, n);
  for (int m = 0; m < m_count; ++m)
    for (int k = 0; k < n; ++k)
      kernel.A(m, k) = kernel_entry(n, num.cp_len, freqs.points[m], k);
  kernel.row_norms_sq = kernel.A.rowwise().squaredNorm();
  return kernel;
}

SpectralKernel restrict_to_active(const SpectralKernel& kernel,
                                  const OfdmNumerology& num) {
  if (kernel.cols() != num.fft_size)
    throw DimensionError("kernel width does not match fft_size");
  SpectralKernel out;
  out.freqs = kernel.freqs;
  out.A = CMatrix::Zero(kernel.rows(), kernel.cols());
  for (int k : num.active_set) out.A.col(k) = kernel.A.col(k);
  out.row_norms_sq = out.A.rowwise().squaredNorm();
  return out;
}

Constellation parse_constellation(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (s == "QPSK") return Constellation::kQpsk;
  if (s == "16QAM") return Constellation::kQam16;
  if (s == "64QAM") return Constellation::kQam64;
  if (s == "256QAM") return Constellation::kQam256;
  throw ConfigError("unknown constellation '" + name + "'");
}

std::string constellation_name(Constellation c) {
  switch (c) {
    case Constellation::kQpsk: return "QPSK";
    case Constellation::kQam16: return "16QAM";
    case Constellation::kQam64: return "64QAM";
    case Constellation::kQam256: return "256QAM";
  }
  return "?";
}

int bits_per_symbol(Constellation c) {
  switch (c) {
    case Constellation::kQpsk: return 2;
    case Constellation::kQam16: return 4;
    case Constellation::kQam64: return 6;
    case Constellation::kQam256: return 8;
  }
  return 0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

DataGrid generate_qam_grid(std::uint64_t seed, const OfdmNumerology& num,
                           int n_tx, Constellation constellation) {
  num.validate();
  if (n_tx < 1) throw ConfigError("n_tx must be at least 1");
  const int axis_bits = bits_per_symbol(constellation) / 2;
  const int levels = 1 << axis_bits;
  const double norm = std::sqrt(2.0 * (levels * levels - 1) / 3.0);
  const unsigned mask = static_cast<unsigned>(levels - 1);

  DataGrid grid;
  grid.numerology = num;
  grid.X = CMatrix::Zero(n_tx, num.fft_size);
  std::mt19937_64 rng(splitmix64(seed));
  for (int j = 0; j < n_tx; ++j) {
    for (int k : num.active_set) {
      const std::uint64_t word = rng();
      const unsigned bi = static_cast<unsigned>(word) & mask;
      const unsigned bq = static_cast<unsigned>(word >> 32) & mask;
      grid.X(j, k) = Complex(gray_pam(bi, axis_bits) / norm,
                             gray_pam(bq, axis_bits) / norm);
    }
  }
  return grid;
}

CMatrix synthesize_time_signal(const DataGrid& grid) {
  const OfdmNumerology& num = grid.numerology;
  const int n = num.fft_size;
  const int cp = num.cp_len;
  if (grid.X.cols() != n)
    throw DimensionError("grid width does not match fft_size");
  CMatrix out(grid.X.rows(), n + cp);
  Eigen::FFT<double> fft;
  std::vector<Complex> freq(n), time(n);
  const double scale = std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < grid.X.rows(); ++j) {
    for (int k = 0; k < n; ++k) freq[k] = grid.X(j, k);
    fft.inv(time, freq);  // includes 1/N
    for (int i = 0; i < cp; ++i) out(j, i) = time[n - cp + i] * scale;
    for (int i = 0; i < n; ++i) out(j, cp + i) = time[i] * scale;
  }
  return out;
}

}  // namespace specprec
