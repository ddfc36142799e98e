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

// Raw complex matrix files.
//
// Layout, all little-endian:
//   u32 magic 0x46575053 ("SPWF"), u32 version (1), u32 rows, u32 cols
//   rows*cols pairs of f64 (re, im), row-major.
// Time-domain waveforms use one row per antenna; frequency grids use the
// N_T x N grid as-is.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "specprec/types.hpp"

namespace specprec {

inline constexpr std::uint32_t kWaveformMagic = 0x46575053u;
inline constexpr std::uint32_t kWaveformVersion = 1u;

void write_complex_matrix(std::ostream& os, const CMatrix& m);
CMatrix read_complex_matrix(std::istream& is);

// Throw IoError on open or short-write failures.
void write_complex_matrix_file(const std::string& path, const CMatrix& m);
CMatrix read_complex_matrix_file(const std::string& path);

// Appends rows to an already written file; the row count in the header is
// patched on close.
class WaveformWriter {
 public:
  WaveformWriter(const std::string& path, int cols);
  ~WaveformWriter();
  WaveformWriter(const WaveformWriter&) = delete;
  WaveformWriter& operator=(const WaveformWriter&) = delete;

  void append(const CMatrix& rows);
  void close();
  std::uint32_t rows() const { return rows_; }

 private:
  struct Impl;
  Impl* impl_;
  int cols_;
  std::uint32_t rows_ = 0;
};

}  // namespace specprec
