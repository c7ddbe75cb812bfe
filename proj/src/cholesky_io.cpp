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

#include "dpmwf/cholesky_io.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "byte_io.hpp"
#include "dpmwf/file_util.hpp"
#include "dpmwf/spatial_cov.hpp"

namespace dpmwf {

namespace {

using Reason = CholeskyFormatError::Reason;

float diag_to_f32(double d) {
  float v = static_cast<float>(d);
  if (static_cast<double>(v) < d) {
    v = std::nextafter(v, std::numeric_limits<float>::infinity());
  }
  return v;
}

// Reads exactly n bytes or reports the offset where the stream ended.
void read_exact(std::istream& in, unsigned char* dst, std::size_t n,
                std::size_t offset, const std::string& what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != n) {
    throw CholeskyFormatError(
        Reason::kTruncated,
        "cholesky file truncated in " + what + " at byte offset " +
            std::to_string(offset + got) + " (expected " + std::to_string(n) +
            " more bytes from offset " + std::to_string(offset) + ")");
  }
}

}  // namespace

CholeskyField quantize_cholesky(const CholeskyField& field) {
  CholeskyField out = field;
  const std::size_t M = field.channels();
  const std::size_t block = M * M;
  auto& data = out.data();
  // GCC 11's SLP vectorizer folds the narrowing pair below into a no-op;
  // CMakeLists disables that pass for this file.
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::size_t row = k % M;
    const std::size_t col = (k % block) / M;
    auto& z = data[k];
    if (row > col) {
      z = {static_cast<double>(static_cast<float>(z.real())),
           static_cast<double>(static_cast<float>(z.imag()))};
    } else if (row == col) {
      z = static_cast<double>(diag_to_f32(z.real()));
    }
  }
  return out;
}

void write_cholesky_field(const CholeskyField& field, const StftConfig& stft,
                          std::ostream& out) {
  const std::size_t M = field.channels();
  const std::size_t F = field.bins();
  const std::size_t T = field.frames();
  if (M * F * T == 0) {
    fail(ErrorKind::kUsage, "cholesky file: empty field (M*F*T must be > 0)");
  }
  if (F != stft.num_bins()) {
    fail(ErrorKind::kUsage, "cholesky file: field has " + std::to_string(F) +
                                " bins but the STFT config implies " +
                                std::to_string(stft.num_bins()));
  }
  validate_cholesky(field);

  out.write(kCholeskyMagic, 8);
  detail::put_u32(out, kCholeskyVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(M));
  detail::put_u32(out, static_cast<std::uint32_t>(F));
  detail::put_u32(out, static_cast<std::uint32_t>(T));
  detail::put_u32(out, static_cast<std::uint32_t>(stft.frame_size));
  detail::put_u32(out, static_cast<std::uint32_t>(stft.hop_size));
  detail::put_u32(out, stft.sample_rate);
  detail::put_f64(out, field.diag_floor());

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      auto L = field.at(t, f);
      for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const auto v = L(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(j));
          detail::put_f32(out, static_cast<float>(v.real()));
          detail::put_f32(out, static_cast<float>(v.imag()));
        }
        const auto d = L(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(i));
        // All-zero bins stay exactly zero.
        detail::put_f32(out, d.real() == 0.0 ? 0.0f : diag_to_f32(d.real()));
      }
    }
  }
  if (!out) fail(ErrorKind::kIo, "cholesky file: write failed");
}

void write_cholesky_file(const CholeskyField& field, const StftConfig& stft,
                         const std::string& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    write_cholesky_field(field, stft, out);
  });
}

CholeskyFile read_cholesky_field(std::istream& in) {
  unsigned char header[kCholeskyHeaderBytes];
  in.read(reinterpret_cast<char*>(header), 8);
  if (in.gcount() != 8 || std::memcmp(header, kCholeskyMagic, 8) != 0) {
    throw CholeskyFormatError(Reason::kBadMagic,
                              "cholesky file: bad magic (expected DPMWFCHL)");
  }
  read_exact(in, header + 8, kCholeskyHeaderBytes - 8, 8, "header");
  const std::uint32_t version = detail::get_u32(header + 8);
  if (version != kCholeskyVersion) {
    throw CholeskyFormatError(Reason::kBadVersion,
                              "cholesky file: unsupported version " +
                                  std::to_string(version));
  }
  const std::size_t M = detail::get_u32(header + 12);
  const std::size_t F = detail::get_u32(header + 16);
  const std::size_t T = detail::get_u32(header + 20);
  StftConfig stft;
  stft.frame_size = detail::get_u32(header + 24);
  stft.hop_size = detail::get_u32(header + 28);
  stft.sample_rate = detail::get_u32(header + 32);
  const double eps = detail::get_f64(header + 36);
  if (M * F * T == 0) {
    throw CholeskyFormatError(Reason::kBadHeader,
                              "cholesky file: header has M*F*T = 0");
  }
  // Guards the allocation against corrupt headers.
  if (M > 256 || T * F * M * M > (std::size_t{1} << 30)) {
    throw CholeskyFormatError(Reason::kBadHeader,
                              "cholesky file: implausible dimensions M=" +
                                  std::to_string(M) + " F=" + std::to_string(F) +
                                  " T=" + std::to_string(T));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw CholeskyFormatError(Reason::kBadHeader,
                              "cholesky file: epsilon must be positive");
  }
  if (stft.num_bins() != F) {
    throw CholeskyFormatError(Reason::kBadHeader,
                              "cholesky file: F disagrees with frame_size");
  }

  CholeskyFile file;
  file.stft = stft;
  file.field = CholeskyField(T, F, M, eps);
  const std::size_t bin_bytes = cholesky_bytes_per_bin(M);
  std::vector<unsigned char> buf(bin_bytes);
  std::size_t offset = kCholeskyHeaderBytes;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      read_exact(in, buf.data(), bin_bytes, offset,
                 "frame " + std::to_string(t) + ", bin " + std::to_string(f));
      auto L = file.field.at(t, f);
      const unsigned char* p = buf.data();
      bool zero = true;
      for (std::size_t i = 0; i < M; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < i; ++j) {
          const double re = detail::get_f32(p);
          const double im = detail::get_f32(p + 4);
          p += 8;
          if (!std::isfinite(re) || !std::isfinite(im)) {
            throw CholeskyFormatError(
                Reason::kBadDiagonal,
                "cholesky file: non-finite entry at byte offset " +
                    std::to_string(offset + (p - buf.data()) - 8));
          }
          L(ii, static_cast<Eigen::Index>(j)) = {re, im};
          zero = zero && re == 0.0 && im == 0.0;
        }
        const double d = detail::get_f32(p);
        p += 4;
        L(ii, ii) = d;
        zero = zero && d == 0.0;
      }
      if (!zero) {
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
          const double d = L(i, i).real();
          if (!(d >= eps) || !std::isfinite(d)) {
            throw CholeskyFormatError(
                Reason::kBadDiagonal,
                "cholesky file: diagonal " + std::to_string(d) +
                    " below epsilon at frame " + std::to_string(t) +
                    ", bin " + std::to_string(f));
          }
        }
      }
      offset += bin_bytes;
    }
  }
  return file;
}

CholeskyFile read_cholesky_file(const std::string& path) {
  CholeskyFile file;
  read_file(path, [&](std::istream& in) { file = read_cholesky_field(in); });
  return file;
}

}  // namespace dpmwf
