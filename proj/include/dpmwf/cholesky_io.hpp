// Copyright 2026 The dpmwf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary interchange format for Cholesky-factor fields produced by external
// noise-covariance estimators. Factors live in the scale-normalized domain:
// L L^H approximates R_nn(t, f) / gamma(f) of the mixture.
//
// Header (44 bytes, little-endian):
//   0  char[8]  magic "DPMWFCHL"
//   8  u32      version = 1
//   12 u32      M (channels)
//   16 u32      F (frequency bins)
//   20 u32      T (frames)
//   24 u32      frame_size
//   28 u32      hop_size
//   32 u32      sample_rate
//   36 f64      epsilon (diagonal floor)
//
// Payload: for t ascending, then f ascending, the lower triangle row by row
// (row i holds columns 0..i). Strictly lower entries are (re, im) f32 pairs,
// diagonal entries a single f32. That is 4M + 4M(M-1) bytes per bin.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "dpmwf/error.hpp"
#include "dpmwf/matrix_field.hpp"
#include "dpmwf/stft.hpp"

namespace dpmwf {

inline constexpr char kCholeskyMagic[8] = {'D', 'P', 'M', 'W', 'F', 'C', 'H', 'L'};
inline constexpr std::uint32_t kCholeskyVersion = 1;
inline constexpr std::size_t kCholeskyHeaderBytes = 44;

constexpr std::size_t cholesky_bytes_per_bin(std::size_t channels) {
  return 4 * channels + 4 * channels * (channels - 1);
}

class CholeskyFormatError : public Error {
 public:
  enum class Reason { kBadMagic, kBadVersion, kBadHeader, kTruncated,
                      kBadDiagonal };
  CholeskyFormatError(Reason reason, const std::string& message)
      : Error(ErrorKind::kFormat, message), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct CholeskyFile {
  CholeskyField field;
  StftConfig stft;
};

// Rounds every entry to f32 the way the writer does; diagonals round toward
// +infinity so that they stay at or above the floor.
CholeskyField quantize_cholesky(const CholeskyField& field);

// Throws kUsage for an empty field or one violating the factor invariants.
void write_cholesky_field(const CholeskyField& field, const StftConfig& stft,
                          std::ostream& out);
void write_cholesky_file(const CholeskyField& field, const StftConfig& stft,
                         const std::string& path);

// Throws CholeskyFormatError.
CholeskyFile read_cholesky_field(std::istream& in);
CholeskyFile read_cholesky_file(const std::string& path);

}  // namespace dpmwf
