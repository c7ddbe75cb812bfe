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


#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dpmwf/cholesky_io.hpp"
#include "dpmwf/file_util.hpp"
#include "dpmwf/spatial_cov.hpp"
#include "dpmwf/wav.hpp"
#include "support.hpp"

using namespace dpmwf;
using dpmwf::testing::Rng;
namespace fs = std::filesystem;

namespace {

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Minimal RIFF writer for encodings the library only reads.
std::string make_wav(std::uint16_t format, std::uint16_t channels,
                     std::uint32_t rate, std::uint16_t bits,
                     const std::string& payload, bool extensible = false) {
  std::string fmt;
  put_u16(fmt, extensible ? 0xFFFE : format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  if (extensible) {
    put_u16(fmt, 22);
    put_u16(fmt, bits);
    put_u32(fmt, 0);
    put_u16(fmt, format);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  }
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + 8 + payload.size()));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, static_cast<std::uint32_t>(fmt.size()));
  out += fmt;
  out += "LIST";  // unrelated chunk to skip
  put_u32(out, 0);
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out += payload;
  return out;
}

CholeskyField random_field(std::size_t T, std::size_t F, std::size_t M, Rng& rng,
                           double eps = 1e-5) {
  CholeskyField L(T, F, M, eps);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) L.at(t, f) = testing::random_factor(M, rng, 0.01);
  }
  return L;
}

StftConfig small_stft() {
  StftConfig c;
  c.frame_size = 8;
  c.hop_size = 4;
  return c;
}

std::string serialize(const CholeskyField& L, const StftConfig& c) {
  std::ostringstream out;
  write_cholesky_field(L, c, out);
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dpmwf_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("io: float WAV round trip") {
  Rng rng(1);
  auto x = testing::random_signal(6, 1234, 32000, rng, 0.2);
  for (double& v : x.data()) v = static_cast<float>(v);
  std::stringstream io;
  write_wav(x, io);
  // RIFF + fmt (18-byte body) + fact + data header.
  CHECK(io.str().size() == 58 + 6 * 1234 * 4);
  const auto y = read_wav(io);
  CHECK(y.channels() == 6);
  CHECK(y.samples() == 1234);
  CHECK(y.sample_rate() == 32000);
  CHECK(y.data() == x.data());
}

TEST_CASE("io: PCM and extensible WAV decoding") {
  SUBCASE("16-bit") {
    std::string payload;
    for (std::int16_t v : {std::int16_t{0}, std::int16_t{16384}, std::int16_t{-32768},
                           std::int16_t{32767}}) {
      put_u16(payload, static_cast<std::uint16_t>(v));
    }
    std::istringstream in(make_wav(1, 2, 16000, 16, payload));
    const auto s = read_wav(in);
    CHECK(s.channels() == 2);
    CHECK(s.samples() == 2);
    CHECK(s.sample_rate() == 16000);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(1, 0) == 0.5);
    CHECK(s(0, 1) == -1.0);
    CHECK(s(1, 1) == 32767.0 / 32768.0);
  }
  SUBCASE("24-bit extensible") {
    std::string payload = std::string("\x00\x00\x40", 3) + std::string("\x00\x00\xC0", 3);
    std::istringstream in(make_wav(1, 1, 32000, 24, payload, true));
    const auto s = read_wav(in);
    CHECK(s.samples() == 2);
    CHECK(s(0, 0) == 0.5);
    CHECK(s(0, 1) == -0.5);
  }
  SUBCASE("64-bit float") {
    std::string payload(16, '\0');
    const double v[2] = {0.25, -0.125};
    std::memcpy(payload.data(), v, 16);
    std::istringstream in(make_wav(3, 1, 32000, 64, payload));
    const auto s = read_wav(in);
    CHECK(s(0, 0) == 0.25);
    CHECK(s(0, 1) == -0.125);
  }
  SUBCASE("rejected inputs") {
    std::istringstream junk("RIFX....WAVE");
    CHECK_THROWS_AS(read_wav(junk), Error);
    std::istringstream alaw(make_wav(6, 1, 8000, 8, "abcd"));
    CHECK_THROWS_AS(read_wav(alaw), Error);
    std::istringstream pcm8(make_wav(1, 1, 8000, 8, "abcd"));
    CHECK_THROWS_AS(read_wav(pcm8), Error);
    std::string nan_payload(4, '\0');
    const float nan = std::nanf("");
    std::memcpy(nan_payload.data(), &nan, 4);
    std::istringstream bad(make_wav(3, 1, 8000, 32, nan_payload));
    CHECK_THROWS_AS(read_wav(bad), Error);
  }
}

TEST_CASE("io: Cholesky bytes per bin") {
  CHECK(cholesky_bytes_per_bin(6) == 144);
  CHECK(cholesky_bytes_per_bin(1) == 4);
  Rng rng(2);
  const auto L = random_field(2, 5, 6, rng);
  CHECK(serialize(L, small_stft()).size() == kCholeskyHeaderBytes + 2 * 5 * 144);
}

TEST_CASE("io: Cholesky header layout") {
  Rng rng(3);
  const auto bytes = serialize(random_field(3, 5, 2, rng, 2.5e-4), small_stft());
  CHECK(bytes.substr(0, 8) == "DPMWFCHL");
  const auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
    return v;
  };
  CHECK(u32(8) == 1);
  CHECK(u32(12) == 2);
  CHECK(u32(16) == 5);
  CHECK(u32(20) == 3);
  CHECK(u32(24) == 8);
  CHECK(u32(28) == 4);
  CHECK(u32(32) == 32000);
  double eps = 0.0;
  std::memcpy(&eps, bytes.data() + 36, 8);
  CHECK(eps == 2.5e-4);
}

TEST_CASE("io: payload order is row-major lower triangle") {
  CholeskyField L(1, 5, 2, 1e-5);
  L.at(0, 0) << 1.0, 0.0, cplx(2.0, 3.0), 4.0;
  const auto bytes = serialize(L, small_stft());
  float v[4];
  std::memcpy(v, bytes.data() + kCholeskyHeaderBytes, 16);
  CHECK(v[0] == 1.0f);  // L00
  CHECK(v[1] == 2.0f);  // Re L10
  CHECK(v[2] == 3.0f);  // Im L10
  CHECK(v[3] == 4.0f);  // L11
}

TEST_CASE("io: 100 random fields round trip bit-exactly") {
  Rng rng(4);
  std::uniform_int_distribution<std::size_t> dm(1, 6), dt(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t M = dm(rng), T = dt(rng);
    const auto q = quantize_cholesky(random_field(T, 5, M, rng));
    const std::string bytes = serialize(q, small_stft());
    std::istringstream in(bytes);
    const CholeskyFile back = read_cholesky_field(in);
    REQUIRE(back.stft == small_stft());
    REQUIRE(back.field.diag_floor() == q.diag_floor());
    REQUIRE(back.field.data() == q.data());
    REQUIRE(serialize(back.field, back.stft) == bytes);
  }
}

TEST_CASE("io: quantized entries are exactly representable in f32") {
  // Guards against the narrowing pair being folded away by the optimizer.
  Rng rng(5);
  const auto L = random_field(6, 33, 6, rng);
  const auto q = quantize_cholesky(L);
  for (std::size_t i = 0; i < q.data().size(); ++i) {
    const cplx v = q.data()[i];
    REQUIRE(static_cast<double>(static_cast<float>(v.real())) == v.real());
    REQUIRE(static_cast<double>(static_cast<float>(v.imag())) == v.imag());
  }
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t f = 0; f < 33; ++f) {
      for (Eigen::Index k = 0; k < 6; ++k) {
        // Diagonals round up, off-diagonals to nearest.
        CHECK(q.at(t, f)(k, k).real() >= L.at(t, f)(k, k).real());
        CHECK(q.at(t, f)(k, k).real() >= q.diag_floor());
        if (k > 0) {
          const cplx a = q.at(t, f)(k, 0), b = L.at(t, f)(k, 0);
          CHECK(std::abs(a.real() - b.real()) <= 1e-7 * std::abs(b.real()));
        }
      }
    }
  }
  // Already-representable input is a fixed point.
  CHECK(quantize_cholesky(q).data() == q.data());
}

TEST_CASE("io: writer rejects empty and invalid fields") {
  std::ostringstream out;
  CHECK_THROWS_AS(write_cholesky_field(CholeskyField(0, 5, 2, 1e-5), small_stft(), out), Error);
  CholeskyField upper(1, 5, 2, 1e-5);
  upper.at(0, 0) << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(write_cholesky_field(upper, small_stft(), out), Error);
}

TEST_CASE("io: reader rejects malformed files with distinct reasons") {
  Rng rng(6);
  const std::string good = serialize(random_field(2, 5, 3, rng), small_stft());
  const auto reason_of = [](const std::string& bytes) {
    std::istringstream in(bytes);
    try {
      read_cholesky_field(in);
    } catch (const CholeskyFormatError& e) {
      CHECK(e.kind() == ErrorKind::kFormat);
      return e.reason();
    }
    FAIL("accepted a malformed file");
    return CholeskyFormatError::Reason::kBadHeader;
  };
  using R = CholeskyFormatError::Reason;

  std::string magic = good;
  magic[3] = 'X';
  CHECK(reason_of(magic) == R::kBadMagic);
  CHECK(reason_of("") == R::kBadMagic);

  std::string version = good;
  version[8] = 2;
  CHECK(reason_of(version) == R::kBadVersion);

  CHECK(reason_of(good.substr(0, 30)) == R::kTruncated);

  // Cut in the middle of the second bin.
  const std::size_t cut = kCholeskyHeaderBytes + cholesky_bytes_per_bin(3) + 10;
  std::istringstream in(good.substr(0, cut));
  try {
    read_cholesky_field(in);
    FAIL("accepted a truncated file");
  } catch (const CholeskyFormatError& e) {
    CHECK(e.reason() == R::kTruncated);
    CHECK(std::string(e.what()).find("byte offset " + std::to_string(cut)) !=
          std::string::npos);
  }

  std::string zero_dims = good;
  std::memset(zero_dims.data() + 20, 0, 4);  // T = 0
  CHECK(reason_of(zero_dims) == R::kBadHeader);

  std::string huge = good;
  std::memset(huge.data() + 20, 0xff, 4);
  CHECK(reason_of(huge) == R::kBadHeader);

  std::string negative = good;
  const float minus = -1.0f;
  std::memcpy(negative.data() + kCholeskyHeaderBytes, &minus, 4);  // L00
  CHECK(reason_of(negative) == R::kBadDiagonal);
}

TEST_CASE("io: zero bins pass the diagonal check") {
  CholeskyField L(1, 5, 2, 1e-5);
  L.at(0, 1) = Eigen::MatrixXcd::Identity(2, 2);
  std::istringstream in(serialize(L, small_stft()));
  const auto back = read_cholesky_field(in);
  CHECK(back.field.data() == L.data());
}

TEST_CASE("io: atomic file writes") {
  TempDir dir;
  const std::string path = (dir.path / "out.bin").string();
  write_file_atomic(path, [](std::ostream& out) { out << "first"; });
  CHECK_THROWS_AS(write_file_atomic(path, [](std::ostream& out) {
                    out << "partial";
                    fail(ErrorKind::kNumerical, "boom");
                  }),
                  Error);
  std::string got;
  read_file(path, [&](std::istream& in) { std::getline(in, got); });
  CHECK(got == "first");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);  // temporary removed
  CHECK_THROWS_AS(read_file((dir.path / "missing").string(), [](std::istream&) {}), Error);
  try {
    write_file_atomic((dir.path / "no" / "such" / "dir" / "x").string(),
                      [](std::ostream& out) { out << 1; });
    FAIL("wrote into a missing directory");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}

TEST_CASE("io: file wrappers") {
  TempDir dir;
  Rng rng(7);
  auto x = testing::random_signal(2, 500, 32000, rng, 0.1);
  for (double& v : x.data()) v = static_cast<float>(v);
  const std::string wav = (dir.path / "x.wav").string();
  write_wav_file(x, wav);
  CHECK(read_wav_file(wav).data() == x.data());

  const auto q = quantize_cholesky(random_field(2, 5, 3, rng));
  const std::string chl = (dir.path / "x.chol").string();
  write_cholesky_file(q, small_stft(), chl);
  CHECK(read_cholesky_file(chl).field.data() == q.data());
  CHECK(fs::file_size(chl) == kCholeskyHeaderBytes + 10 * cholesky_bytes_per_bin(3));
}
