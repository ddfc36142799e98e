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

#include "specprec/waveform_io.hpp"

#include <array>
#include <string>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace specprec {

namespace {

static_assert(std::numeric_limits<double>::is_iec559);

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4))
    throw IoError("truncated waveform header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(unsigned char* out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(bits >> (8 * i));
}

double get_f64(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_rows(std::ostream& os, const CMatrix& m) {
  std::vector<unsigned char> buf(static_cast<size_t>(m.cols()) * 16);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f64(&buf[c * 16], m(r, c).real());
      put_f64(&buf[c * 16 + 8], m(r, c).imag());
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
  }
}

std::uint32_t checked_dim(Eigen::Index n) {
  if (n < 0 || static_cast<unsigned long long>(n) >
                   std::numeric_limits<std::uint32_t>::max())
    throw IoError("matrix dimension does not fit the header");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

void write_complex_matrix(std::ostream& os, const CMatrix& m) {
  put_u32(os, kWaveformMagic);
  put_u32(os, kWaveformVersion);
  put_u32(os, checked_dim(m.rows()));
  put_u32(os, checked_dim(m.cols()));
  write_rows(os, m);
  if (!os) throw IoError("waveform write failed");
}

CMatrix read_complex_matrix(std::istream& is) {
  if (get_u32(is) != kWaveformMagic) throw IoError("bad waveform magic");
  const std::uint32_t version = get_u32(is);
  if (version != kWaveformVersion)
    throw IoError("unsupported waveform version " + std::to_string(version));
  const std::uint32_t rows = get_u32(is);
  const std::uint32_t cols = get_u32(is);
  CMatrix m(rows, cols);
  std::vector<unsigned char> buf(static_cast<size_t>(cols) * 16);
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (!is.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size())))
      throw IoError("truncated waveform payload");
    for (std::uint32_t c = 0; c < cols; ++c)
      m(r, c) = Complex(get_f64(&buf[c * 16]), get_f64(&buf[c * 16 + 8]));
  }
  return m;
}

void write_complex_matrix_file(const std::string& path, const CMatrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_complex_matrix(os, m);
}

CMatrix read_complex_matrix_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_complex_matrix(is);
}

struct WaveformWriter::Impl {
  std::ofstream os;
};

WaveformWriter::WaveformWriter(const std::string& path, int cols)
    : impl_(new Impl), cols_(cols) {
  impl_->os.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->os) {
    delete impl_;
    throw IoError("cannot open " + path + " for writing");
  }
  put_u32(impl_->os, kWaveformMagic);
  put_u32(impl_->os, kWaveformVersion);
  put_u32(impl_->os, 0);
  put_u32(impl_->os, checked_dim(cols));
}

WaveformWriter::~WaveformWriter() {
  try {
    close();
  } catch (...) {
  }
  delete impl_;
}

void WaveformWriter::append(const CMatrix& rows) {
  if (!impl_->os.is_open()) throw IoError("waveform writer is closed");
  if (rows.cols() != cols_) throw DimensionError("waveform row width changed");
  write_rows(impl_->os, rows);
  rows_ += checked_dim(rows.rows());
  if (!impl_->os) throw IoError("waveform write failed");
}

void WaveformWriter::close() {
  if (!impl_->os.is_open()) return;
  impl_->os.seekp(8);
  put_u32(impl_->os, rows_);
  impl_->os.close();
  if (impl_->os.fail()) throw IoError("waveform close failed");
}

}  // namespace specprec
