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

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace dpmwf {

// T x F grid of M x M complex matrices, each stored column-major and
// contiguous so that at(t, f) maps onto an Eigen matrix without copying.
class MatrixField {
 public:
  using cplx = std::complex<double>;
  using MatrixMap = Eigen::Map<Eigen::MatrixXcd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXcd>;

  MatrixField() = default;
  MatrixField(std::size_t frames, std::size_t bins, std::size_t channels)
      : frames_(frames),
        bins_(bins),
        channels_(channels),
        data_(frames * bins * channels * channels) {}

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return frames_ * bins_; }

  MatrixMap at(std::size_t t, std::size_t f) {
    const auto m = static_cast<Eigen::Index>(channels_);
    return {data_.data() + offset(t, f), m, m};
  }
  ConstMatrixMap at(std::size_t t, std::size_t f) const {
    const auto m = static_cast<Eigen::Index>(channels_);
    return {data_.data() + offset(t, f), m, m};
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  bool same_shape(const MatrixField& other) const {
    return frames_ == other.frames_ && bins_ == other.bins_ &&
           channels_ == other.channels_;
  }

 private:
  std::size_t offset(std::size_t t, std::size_t f) const {
    return (t * bins_ + f) * channels_ * channels_;
  }

  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  std::vector<cplx> data_;
};

enum class CovarianceTag { kMixture, kNoise, kSpeech, kOutput, kFilteredNoise };

// Hermitian PSD matrices R(t, f).
class CovarianceField : public MatrixField {
 public:
  CovarianceField() = default;
  CovarianceField(std::size_t frames, std::size_t bins, std::size_t channels,
                  CovarianceTag tag)
      : MatrixField(frames, bins, channels), tag_(tag) {}

  CovarianceTag tag() const { return tag_; }
  void set_tag(CovarianceTag tag) { tag_ = tag; }

 private:
  CovarianceTag tag_ = CovarianceTag::kMixture;
};

// Lower-triangular factors with real diagonals >= diag_floor. A bin whose
// factor is entirely zero stands for the zero matrix.
class CholeskyField : public MatrixField {
 public:
  CholeskyField() = default;
  CholeskyField(std::size_t frames, std::size_t bins, std::size_t channels,
                double diag_floor)
      : MatrixField(frames, bins, channels), diag_floor_(diag_floor) {}

  double diag_floor() const { return diag_floor_; }
  void set_diag_floor(double eps) { diag_floor_ = eps; }

 private:
  double diag_floor_ = 1e-5;
};

// W(t, f) for y = W x.
using FilterField = MatrixField;

}  // namespace dpmwf
