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

#include "dpmwf/stft.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "dpmwf/error.hpp"
#include "fft.hpp"

namespace dpmwf {

namespace detail {

namespace {
// The FFTW planner is not reentrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(size_);
  spectrum_ = fftw_alloc_complex(size_ / 2 + 1);
  int n = static_cast<int>(size_);
  forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, spectrum_, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, spectrum_, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(forward_plan_);
  fftw_destroy_plan(inverse_plan_);
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  std::fill(real_ + in.size(), real_ + size_, 0.0);
  fftw_execute(forward_plan_);
  for (std::size_t k = 0; k < num_bins(); ++k) {
    out[k] = {spectrum_[k][0], spectrum_[k][1]};
  }
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  for (std::size_t k = 0; k < num_bins(); ++k) {
    spectrum_[k][0] = in[k].real();
    spectrum_[k][1] = in[k].imag();
  }
  // c2r ignores the imaginary parts of DC and Nyquist; zero them so the
  // result is the Hermitian reconstruction of the one-sided spectrum.
  spectrum_[0][1] = 0.0;
  if (size_ % 2 == 0) spectrum_[size_ / 2][1] = 0.0;
  fftw_execute(inverse_plan_);
  const double scale = 1.0 / static_cast<double>(size_);
  const std::size_t n = std::min(out.size(), size_);
  for (std::size_t i = 0; i < n; ++i) out[i] = real_[i] * scale;
}

}  // namespace detail

std::vector<double> sqrt_hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                       static_cast<double>(i) /
                                       static_cast<double>(n));
    w[i] = std::sqrt(std::max(hann, 0.0));
  }
  return w;
}

double overlap_gain(const StftConfig& config) {
  return static_cast<double>(config.frame_size) /
         (2.0 * static_cast<double>(config.hop_size));
}

void StftConfig::validate() const {
  if (frame_size < 2 || frame_size % 2 != 0) {
    fail(ErrorKind::kUsage,
         "stft: frame_size must be even and >= 2, got " +
             std::to_string(frame_size));
  }
  if (hop_size == 0 || hop_size > frame_size ||
      (frame_size / 2) % hop_size != 0) {
    fail(ErrorKind::kUsage, "stft: hop_size " + std::to_string(hop_size) +
                                " must divide frame_size/2 = " +
                                std::to_string(frame_size / 2));
  }
  if (sample_rate == 0) fail(ErrorKind::kUsage, "stft: sample_rate is zero");

  auto w = sqrt_hann_window(frame_size);
  const double target = overlap_gain(*this);
  for (std::size_t n = 0; n < hop_size; ++n) {
    double sum = 0.0;
    for (std::size_t k = n; k < frame_size; k += hop_size) sum += w[k] * w[k];
    if (std::abs(sum - target) > 1e-10) {
      fail(ErrorKind::kUsage, "stft: window pair is not overlap-add "
                              "constant at hop " +
                                  std::to_string(hop_size));
    }
  }
}

std::size_t num_frames(std::size_t num_samples, const StftConfig& config) {
  const std::size_t front = config.frame_size - config.hop_size;
  return (front + num_samples - 1) / config.hop_size + 1;
}

Spectrogram::Spectrogram(std::size_t frames, std::size_t channels,
                         const StftConfig& config, std::size_t num_samples)
    : frames_(frames),
      bins_(config.num_bins()),
      channels_(channels),
      num_samples_(num_samples),
      config_(config),
      data_(frames * config.num_bins() * channels) {}

Spectrogram analyze(const MultichannelSignal& signal,
                    const StftConfig& config) {
  config.validate();
  if (signal.channels() == 0 || signal.samples() == 0) {
    fail(ErrorKind::kUsage, "stft: empty signal");
  }
  if (signal.samples() < config.frame_size) {
    fail(ErrorKind::kUsage, "stft: signal has " +
                                std::to_string(signal.samples()) +
                                " samples, fewer than one frame");
  }
  if (signal.sample_rate() != 0 && signal.sample_rate() != config.sample_rate) {
    fail(ErrorKind::kUsage,
         "stft: signal sample rate " + std::to_string(signal.sample_rate()) +
             " differs from configured " + std::to_string(config.sample_rate));
  }
  for (double v : signal.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kUsage, "stft: non-finite sample");
  }

  const std::size_t frame = config.frame_size;
  const std::size_t hop = config.hop_size;
  const std::size_t front = frame - hop;
  const std::size_t frames = num_frames(signal.samples(), config);
  const std::size_t bins = config.num_bins();
  const std::size_t channels = signal.channels();

  Spectrogram spec(frames, channels, config, signal.samples());
  const auto window = sqrt_hann_window(frame);
  detail::RealFft fft(frame);
  std::vector<double> buffer(frame);
  std::vector<cplx> out(bins);

  for (std::size_t m = 0; m < channels; ++m) {
    auto x = signal.channel(m);
    for (std::size_t t = 0; t < frames; ++t) {
      // padded index p maps to input index p - front
      const std::size_t start = t * hop;
      for (std::size_t i = 0; i < frame; ++i) {
        const std::size_t p = start + i;
        double v = 0.0;
        if (p >= front && p - front < x.size()) v = x[p - front];
        buffer[i] = v * window[i];
      }
      fft.forward(buffer, out);
      for (std::size_t f = 0; f < bins; ++f) spec(t, f, m) = out[f];
    }
  }
  return spec;
}

MultichannelSignal synthesize(const Spectrogram& spec) {
  const StftConfig& config = spec.config();
  config.validate();
  if (spec.bins() != config.num_bins() ||
      spec.data().size() != spec.frames() * spec.bins() * spec.channels()) {
    fail(ErrorKind::kUsage, "stft: spectrogram dimensions are inconsistent");
  }
  if (spec.frames() != num_frames(spec.num_samples(), config)) {
    fail(ErrorKind::kUsage, "stft: frame count does not match signal length");
  }

  const std::size_t frame = config.frame_size;
  const std::size_t hop = config.hop_size;
  const std::size_t front = frame - hop;
  const std::size_t bins = spec.bins();
  const std::size_t padded = (spec.frames() - 1) * hop + frame;
  const auto window = sqrt_hann_window(frame);
  const double norm = 1.0 / overlap_gain(config);

  MultichannelSignal out(spec.channels(), spec.num_samples(),
                         config.sample_rate);
  detail::RealFft fft(frame);
  std::vector<cplx> in(bins);
  std::vector<double> buffer(frame);
  std::vector<double> acc(padded);

  for (std::size_t m = 0; m < spec.channels(); ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      for (std::size_t f = 0; f < bins; ++f) in[f] = spec(t, f, m);
      fft.inverse(in, buffer);
      const std::size_t start = t * hop;
      for (std::size_t i = 0; i < frame; ++i) {
        acc[start + i] += buffer[i] * window[i];
      }
    }
    auto y = out.channel(m);
    for (std::size_t n = 0; n < y.size(); ++n) y[n] = acc[front + n] * norm;
  }
  return out;
}

}  // namespace dpmwf
