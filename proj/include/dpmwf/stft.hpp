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

// Short-time Fourier transform with square-root periodic Hann analysis and
// synthesis windows.
//
// Framing: the signal is zero-padded with (frame_size - hop_size) samples in
// front, and at the end with enough zeros that every input sample lies under
// frame_size / hop_size full frames. With N input samples the frame count is
//
//   T = floor((frame_size - hop_size + N - 1) / hop_size) + 1
//
// and frame t covers padded samples [t * hop, t * hop + frame_size).
//
// Transform convention: X(k) = sum_n w(n) x(n) exp(-j 2 pi k n / frame_size),
// one-sided, F = frame_size / 2 + 1 bins, no normalization. Synthesis divides
// by frame_size and by the overlap gain sum_t w^2(n - t hop), which equals
// frame_size / (2 hop_size) for the supported hops.
//
// Energy: sum_t sum_k c_k |X(t,k)|^2 = frame_size * overlap_gain * sum_n x^2,
// with c_k = 1 for the DC and Nyquist bins and 2 otherwise.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dpmwf/signal.hpp"

namespace dpmwf {

using cplx = std::complex<double>;

struct StftConfig {
  std::size_t frame_size = 512;
  std::size_t hop_size = 256;
  std::uint32_t sample_rate = 32000;

  std::size_t num_bins() const { return frame_size / 2 + 1; }
  double bin_frequency(std::size_t k) const {
    return static_cast<double>(k) * sample_rate /
           static_cast<double>(frame_size);
  }
  // Throws kUsage unless frame_size is even, hop_size divides frame_size / 2
  // and the squared window overlap-adds to a constant within 1e-10.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

// sqrt of the periodic Hann window, length n.
std::vector<double> sqrt_hann_window(std::size_t n);

// sum_t w^2(n - t hop); constant by construction for validated configs.
double overlap_gain(const StftConfig& config);

std::size_t num_frames(std::size_t num_samples, const StftConfig& config);

// T x F x M complex grid. Channel index is fastest, so bin(t, f) is a
// contiguous M-vector.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t frames, std::size_t channels,
              const StftConfig& config, std::size_t num_samples);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t channels() const { return channels_; }
  std::size_t num_samples() const { return num_samples_; }
  const StftConfig& config() const { return config_; }

  cplx& operator()(std::size_t t, std::size_t f, std::size_t m) {
    return data_[(t * bins_ + f) * channels_ + m];
  }
  const cplx& operator()(std::size_t t, std::size_t f, std::size_t m) const {
    return data_[(t * bins_ + f) * channels_ + m];
  }

  Eigen::Map<Eigen::VectorXcd> bin(std::size_t t, std::size_t f) {
    return {data_.data() + (t * bins_ + f) * channels_,
            static_cast<Eigen::Index>(channels_)};
  }
  Eigen::Map<const Eigen::VectorXcd> bin(std::size_t t, std::size_t f) const {
    return {data_.data() + (t * bins_ + f) * channels_,
            static_cast<Eigen::Index>(channels_)};
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  bool same_shape(const Spectrogram& other) const {
    return frames_ == other.frames_ && bins_ == other.bins_ &&
           channels_ == other.channels_;
  }

 private:
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  std::size_t num_samples_ = 0;
  StftConfig config_;
  std::vector<cplx> data_;
};

// Throws kUsage on an empty signal, fewer than frame_size samples, a sample
// rate that disagrees with the config, or non-finite samples.
Spectrogram analyze(const MultichannelSignal& signal, const StftConfig& config);

// Weighted overlap-add inverse of analyze; returns num_samples() samples.
MultichannelSignal synthesize(const Spectrogram& spec);

}  // namespace dpmwf
