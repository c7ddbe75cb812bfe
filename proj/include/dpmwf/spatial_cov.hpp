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

// Spatial covariance estimation and the scale-normalized Cholesky
// parameterization of noise covariances.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpmwf/matrix_field.hpp"
#include "dpmwf/stft.hpp"

namespace dpmwf {

inline constexpr double kDefaultCholeskyFloor = 1e-5;
inline constexpr double kGammaFloor = 1e-12;
inline constexpr double kFactorizeLoading = 1e-10;

// Per-frequency scaling gamma(f): the utterance-average of trace(R)/M.
struct ScaleProfile {
  std::vector<double> gamma;
  // Bins whose average trace was zero and got clamped to kGammaFloor.
  std::size_t floored_bins = 0;
};

// Number of frames averaged for a window of window_ms:
// max(1, floor(window_ms * fs / (1000 * hop))).
std::size_t window_frames(double window_ms, const StftConfig& config);

// Causal sliding-window sample covariance. Frame t averages frames
// max(0, t - K + 1) .. t; during warm-up fewer than K frames are averaged.
CovarianceField sliding_covariance(const Spectrogram& spec, double window_ms,
                                   CovarianceTag tag = CovarianceTag::kMixture);

// Same estimator applied to a noise-only spectrogram.
CovarianceField oracle_noise_covariance(const Spectrogram& noise_spec,
                                        double window_ms);

ScaleProfile scale_profile(const CovarianceField& cov);

// x(t, f) / sqrt(gamma(f)).
Spectrogram normalize_spectrogram(const Spectrogram& spec,
                                  const ScaleProfile& profile);

// R(t, f) / gamma(f).
CovarianceField normalize_covariance(const CovarianceField& cov,
                                     const ScaleProfile& profile);

// ln(1 + e^u), evaluated without overflow for large u.
double softplus(double u);

// Builds L from unconstrained network-style outputs. raw_diag holds T*F*M
// reals, raw_lower T*F*M(M-1)/2 complex values, both ordered by (t, f) and
// then row-major over the strictly lower triangle. The diagonal becomes
// softplus(raw) + eps.
CholeskyField cholesky_assemble(std::span<const double> raw_diag,
                                std::span<const cplx> raw_lower,
                                std::size_t frames, std::size_t bins,
                                std::size_t channels, double eps);

// L(t, f) L(t, f)^H.
CovarianceField reconstruct(const CholeskyField& chol);

struct FactorizeResult {
  CholeskyField field;
  // Bins that needed diagonal loading to factor.
  std::size_t loaded_bins = 0;
  // Bins whose smallest eigenvalue was below -1e-10 * trace; these are
  // factored after projecting onto the PSD cone.
  std::size_t indefinite_bins = 0;
  std::size_t zero_bins = 0;
};

// Per-bin Cholesky factorization with non-negative real diagonal. Zero
// matrices map to zero factors. Numerically semidefinite matrices are loaded
// with kFactorizeLoading * trace / M on the diagonal.
FactorizeResult factorize(const CovarianceField& cov,
                          double eps = kDefaultCholeskyFloor);

// Raises every diagonal of non-zero bins to at least the field's floor.
void floor_diagonal(CholeskyField& chol);

// Throws kFormat if a bin has non-zero entries above the diagonal, a
// non-real diagonal, or a diagonal below the floor (all-zero bins pass).
void validate_cholesky(const CholeskyField& chol);

// max over bins of ||R - R^H||_F / max(||R||_F, 1e-30).
double max_hermitian_defect(const MatrixField& field);

}  // namespace dpmwf
