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

// Direction-preserving MIMO Wiener filtering.
//
//   W_mwf      = I - Rnn Rxx^-1
//   W_{mu+nu}  = (Rxx - Rnn) (Rxx + (mu + nu - 1) Rnn)^-1
//   a'         = a + (1 - a) nu tw / (mu tn + nu tw)
//                tn = Re tr(Rnn), tw = max(0, Re tr(W_{mu+nu} Rnn))
//   W_dp       = (1 - a') W_{mu+nu} + a' I
//
// Inverses are applied through a Cholesky solve of the Hermitian
// denominator. When the reciprocal condition estimate drops below 1e-12 the
// denominator is loaded with 1e-10 * trace / M on the diagonal; if it still
// does not factor, the bin's filter is set to zero and counted as singular.

#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "dpmwf/matrix_field.hpp"
#include "dpmwf/stft.hpp"

namespace dpmwf {

struct FilterParams {
  double a = 0.0;   // lower bound on identity mixing
  double mu = 1.0;  // noise reduction vs. speech distortion
  double nu = 8.0;  // direction-preserving strength
  double window_ms = 100.0;

  // Throws kUsage for a outside [0, 1], negative mu/nu, mu + nu < 1 or a
  // non-positive window.
  void validate() const;
};

// Per-bin outcome flags, optional out-parameter of the matrix functions.
struct BinStatus {
  bool loaded = false;
  bool singular = false;
  // Re tr(W Rnn) was negative and clamped to zero before computing a'.
  bool trace_clamped = false;
};

Eigen::MatrixXcd mwf(const Eigen::MatrixXcd& rxx, const Eigen::MatrixXcd& rnn,
                     BinStatus* status = nullptr);

Eigen::MatrixXcd w_mu_nu(const Eigen::MatrixXcd& rxx,
                         const Eigen::MatrixXcd& rnn, double mu, double nu,
                         BinStatus* status = nullptr);

// Result is always within [a, 1].
double mixing_factor(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& rnn,
                     double a, double mu, double nu,
                     BinStatus* status = nullptr);

// If mixing is non-null it receives a'.
Eigen::MatrixXcd dp_mwf(const Eigen::MatrixXcd& rxx,
                        const Eigen::MatrixXcd& rnn, const FilterParams& params,
                        BinStatus* status = nullptr, double* mixing = nullptr);

struct FilterStats {
  std::size_t bins = 0;
  std::size_t loaded_bins = 0;
  std::size_t singular_bins = 0;
  std::size_t trace_clamped_bins = 0;
  double mixing_min = 1.0;
  double mixing_max = 0.0;
  double mixing_mean = 0.0;
};

FilterField build_filter_field(const MatrixField& rxx, const MatrixField& rnn,
                               const FilterParams& params,
                               FilterStats* stats = nullptr);

// y(t, f) = W(t, f) x(t, f).
Spectrogram apply_filter(const FilterField& w, const Spectrogram& spec);

}  // namespace dpmwf
