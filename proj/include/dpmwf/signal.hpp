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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpmwf {

// M-channel real time-domain signal, stored channel-major.
class MultichannelSignal {
 public:
  MultichannelSignal() = default;
  MultichannelSignal(std::size_t channels, std::size_t samples,
                     std::uint32_t sample_rate)
      : channels_(channels),
        samples_(samples),
        sample_rate_(sample_rate),
        data_(channels * samples, 0.0) {}

  std::size_t channels() const { return channels_; }
  std::size_t samples() const { return samples_; }
  std::uint32_t sample_rate() const { return sample_rate_; }
  bool empty() const { return data_.empty(); }

  std::span<double> channel(std::size_t m) {
    return {data_.data() + m * samples_, samples_};
  }
  std::span<const double> channel(std::size_t m) const {
    return {data_.data() + m * samples_, samples_};
  }
  double& operator()(std::size_t m, std::size_t n) {
    return data_[m * samples_ + n];
  }
  double operator()(std::size_t m, std::size_t n) const {
    return data_[m * samples_ + n];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double energy() const {
    double e = 0.0;
    for (double v : data_) e += v * v;
    return e;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  std::uint32_t sample_rate_ = 0;
  std::vector<double> data_;
};

}  // namespace dpmwf
