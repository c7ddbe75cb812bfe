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

#include "dpmwf/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <vector>

#include "byte_io.hpp"
#include "dpmwf/error.hpp"
#include "dpmwf/file_util.hpp"

namespace dpmwf {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

[[noreturn]] void bad_wav(const std::string& what) {
  fail(ErrorKind::kFormat, "wav: " + what);
}

}  // namespace

MultichannelSignal read_wav(std::istream& in) {
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad_wav("not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = detail::get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) bad_wav("truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = detail::get_u16(f);
      channels = detail::get_u16(f + 2);
      rate = detail::get_u32(f + 4);
      bits = detail::get_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 26) bad_wav("truncated extensible fmt chunk");
        format = detail::get_u16(f + 24);  // first two bytes of the GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Tolerate writers that leave the data size unset or too large.
      data_size = std::min(size, avail);
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) bad_wav("missing fmt chunk");
  if (!data) bad_wav("missing data chunk");
  if (channels == 0) bad_wav("zero channels");

  const bool pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  const bool flt = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!pcm && !flt) {
    bad_wav("unsupported encoding (format " + std::to_string(format) + ", " +
            std::to_string(bits) + " bits)");
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  MultichannelSignal signal(channels, frames, rate);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < channels; ++m) {
      const unsigned char* p = data + (n * channels + m) * width;
      double v = 0.0;
      if (flt) {
        v = bits == 32 ? detail::get_f32(p) : detail::get_f64(p);
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(detail::get_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(detail::get_u32(p)) / 2147483648.0;
      }
      if (!std::isfinite(v)) bad_wav("non-finite sample");
      signal(m, n) = v;
    }
  }
  return signal;
}

MultichannelSignal read_wav_file(const std::string& path) {
  MultichannelSignal signal;
  read_file(path, [&](std::istream& in) { signal = read_wav(in); });
  return signal;
}

void write_wav(const MultichannelSignal& signal, std::ostream& out) {
  const std::size_t channels = signal.channels();
  const std::size_t frames = signal.samples();
  if (channels == 0 || channels > 0xffff) {
    fail(ErrorKind::kUsage, "wav: channel count out of range");
  }
  const std::uint64_t data_bytes = 4ull * channels * frames;
  if (data_bytes > 0xffffffffull - 64) {
    fail(ErrorKind::kUsage, "wav: signal too long for a RIFF file");
  }
  const std::uint32_t rate = signal.sample_rate();
  out.write("RIFF", 4);
  detail::put_u32(out, static_cast<std::uint32_t>(4 + 26 + 12 + 8 + data_bytes));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  detail::put_u32(out, 18);
  detail::put_u16(out, kFormatFloat);
  detail::put_u16(out, static_cast<std::uint16_t>(channels));
  detail::put_u32(out, rate);
  detail::put_u32(out, static_cast<std::uint32_t>(rate * 4 * channels));
  detail::put_u16(out, static_cast<std::uint16_t>(4 * channels));
  detail::put_u16(out, 32);
  detail::put_u16(out, 0);
  out.write("fact", 4);
  detail::put_u32(out, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(frames));
  out.write("data", 4);
  detail::put_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < channels; ++m) {
      detail::put_f32(out, static_cast<float>(signal(m, n)));
    }
  }
}

void write_wav_file(const MultichannelSignal& signal, const std::string& path) {
  write_file_atomic(path, [&](std::ostream& out) { write_wav(signal, out); });
}

}  // namespace dpmwf
