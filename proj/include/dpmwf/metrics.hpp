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

// Evaluation metrics for multichannel enhancement: scale-invariant SDR with a
// scale shared across channels, Cholesky-factor loss, noise reduction,
// covariance cosine similarity, interaural level difference, delay-and-sum
// beamforming and steered response power maps.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dpmwf/geometry.hpp"
#include "dpmwf/matrix_field.hpp"
#include "dpmwf/signal.hpp"
#include "dpmwf/stft.hpp"

namespace dpmwf {

inline constexpr double kDbClamp = 200.0;
inline constexpr double kNormFloor = 1e-12;
inline constexpr double kDefaultCholeskyWeight = 10.0;

// sum_t y(t)^T s(t) / sum_t s(t)^T s(t) over all channels and samples.
double shared_alpha(const MultichannelSignal& y, const MultichannelSignal& s);

// 10 log10(||alpha s||^2 / ||y - alpha s||^2), clamped to +-200 dB.
double si_sdr(const MultichannelSignal& y, const MultichannelSignal& s);

struct CholeskyLoss {
  double value = 0.0;
  std::size_t evaluated_bins = 0;
  std::size_t skipped_bins = 0;  // ||L_ref||_F < 1e-12
};

// Mean over bins of ||L_hat - L_ref||_F / ||L_ref||_F.
CholeskyLoss cholesky_loss(const MatrixField& estimate,
                           const MatrixField& reference);

// -si_sdr_db + weight * cholesky.
double combined_loss(double si_sdr_db, double cholesky,
                     double weight = kDefaultCholeskyWeight);

// 10 log10(sum ||n||^2 / sum ||W n||^2) over all (t, f), clamped at 200 dB.
double noise_reduction(const FilterField& w, const Spectrogram& noise);

// Re tr(R1^H R2) / (||R1||_F ||R2||_F). Throws for an operand with
// Frobenius norm below 1e-12.
double cosine_sim(const Eigen::MatrixXcd& r1, const Eigen::MatrixXcd& r2);

struct FieldSimilarity {
  double value = 0.0;
  std::size_t evaluated_bins = 0;
  std::size_t skipped_bins = 0;
};

// Mean cosine similarity over the bins where both matrices have norm >= 1e-12.
FieldSimilarity field_similarity(const MatrixField& a, const MatrixField& b);

// CovSim, SpeechSim and NoiseSim of one evaluation. cov_sim is only
// meaningful when has_cov_sim is set. Bin counts refer to SpeechSim.
struct SimilarityReport {
  double cov_sim = 0.0;
  bool has_cov_sim = false;
  double speech_sim = 0.0;
  double noise_sim = 0.0;
  std::size_t evaluated_bin_count = 0;
  std::size_t skipped_bin_count = 0;
};

// 10 log10(sum left^2 / sum right^2).
double ild(std::span<const double> left, std::span<const double> right);

struct ChannelPair {
  std::span<const double> left;
  std::span<const double> right;
};

double ild_error(const ChannelPair& estimate, const ChannelPair& reference);

struct SteeringGrid {
  std::vector<double> azimuths_deg;
  std::vector<double> frequencies_hz;
  double sound_speed = kSoundSpeed;
  ArrayGeometry array;

  // Azimuths 0, step, 2 step, ... < 360 and the STFT bin frequencies.
  static SteeringGrid uniform(double step_deg, const StftConfig& config,
                              const ArrayGeometry& array,
                              double sound_speed = kSoundSpeed);
  void validate() const;
};

// d_m = exp(-j 2 pi f tau_m) with tau_m = r_m . u(az) / c, u the propagation
// direction of a plane wave arriving from az. Not normalized.
Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double azimuth_deg,
                                 double frequency_hz,
                                 double sound_speed = kSoundSpeed);

// y(t, f) = (1/M) sum_m conj(d_m) x_m(t, f). Returns a single-channel
// spectrogram with the input's STFT config.
Spectrogram ds_beamform(const Spectrogram& spec, double azimuth_deg,
                        const SteeringGrid& grid);

struct SrpMap {
  std::vector<double> azimuths_deg;
  std::vector<double> frequencies_hz;
  // values[a * frequencies + f]
  std::vector<double> values;

  double operator()(std::size_t a, std::size_t f) const {
    return values[a * frequencies_hz.size() + f];
  }

  // Azimuth maximizing the power summed over bins in [f_lo, f_hi], with each
  // bin normalized by its own maximum.
  double band_peak_azimuth(double f_lo_hz, double f_hi_hz) const;
  // Per-bin argmax azimuth.
  double peak_azimuth(std::size_t f) const;
};

// P(az, f) = (1/T) sum_t d^H R(t, f) d with unit-norm d and R the sliding
// covariance over window_ms.
SrpMap srp_map(const Spectrogram& spec, const SteeringGrid& grid,
               double window_ms = 100.0);

// CSV: header "azimuth_deg,<f_0>,...,<f_F-1>" in Hz, then one row per
// azimuth.
void write_srp_csv(const SrpMap& map, std::ostream& out);

// Binary 8-bit PGM, one row per azimuth and one column per bin. Values are
// mapped linearly in dB from (max - range_db) to max onto 0..255.
void write_srp_pgm(const SrpMap& map, std::ostream& out,
                   double range_db = 40.0);

}  // namespace dpmwf
