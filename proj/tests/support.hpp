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

// Shared helpers for the unit tests and the acceptance binary.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "dpmwf/geometry.hpp"
#include "dpmwf/signal.hpp"

namespace dpmwf::testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols,
                                       Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = {g(rng), g(rng)};
  }
  return a;
}

// A A^H with A of size M x rank: Hermitian PSD, full rank when rank >= M.
inline Eigen::MatrixXcd random_psd(Eigen::Index m, Rng& rng,
                                   Eigen::Index rank = -1) {
  const Eigen::MatrixXcd a = random_complex(m, rank < 0 ? m + 2 : rank, rng);
  Eigen::MatrixXcd r = a * a.adjoint();
  return 0.5 * (r + r.adjoint()).eval();
}

// Random lower-triangular factor with real diagonal in [lo, lo + 1].
inline Eigen::MatrixXcd random_factor(Eigen::Index m, Rng& rng, double lo) {
  std::uniform_real_distribution<double> u(lo, lo + 1.0);
  Eigen::MatrixXcd l = random_complex(m, m, rng);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) l(i, j) = 0.0;
    l(i, i) = u(rng);
  }
  return l;
}

inline MultichannelSignal random_signal(std::size_t channels,
                                        std::size_t samples,
                                        std::uint32_t rate, Rng& rng,
                                        double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  MultichannelSignal s(channels, samples, rate);
  for (double& v : s.data()) v = g(rng);
  return s;
}

inline double rel_error(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

// Band-limited plane wave from azimuth az_deg, built as a sum of sinusoids
// evaluated at the exact per-mic arrival times. Independent of any FFT.
inline MultichannelSignal plane_wave(const ArrayGeometry& array, double az_deg,
                                     std::size_t samples, std::uint32_t rate,
                                     double f_lo, double f_hi,
                                     std::size_t partials, Rng& rng,
                                     double c = kSoundSpeed) {
  std::uniform_real_distribution<double> uf(f_lo, f_hi);
  std::uniform_real_distribution<double> up(0.0, 2.0 * std::numbers::pi);
  std::vector<double> freq(partials), phase(partials);
  for (std::size_t k = 0; k < partials; ++k) {
    freq[k] = uf(rng);
    phase[k] = up(rng);
  }
  const Eigen::Vector3d u = propagation_direction(az_deg);
  MultichannelSignal x(array.size(), samples, rate);
  for (std::size_t m = 0; m < array.size(); ++m) {
    const double tau = array.mic_positions[m].dot(u) / c;
    for (std::size_t k = 0; k < partials; ++k) {
      const double w = 2.0 * std::numbers::pi * freq[k];
      for (std::size_t n = 0; n < samples; ++n) {
        const double t = static_cast<double>(n) / rate - tau;
        x(m, n) += std::cos(w * t + phase[k]);
      }
    }
  }
  return x;
}

}  // namespace dpmwf::testing
