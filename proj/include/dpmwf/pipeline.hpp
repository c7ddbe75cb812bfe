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

// End-to-end enhancement and evaluation.
//
// Enhancement: STFT of the mixture, sliding-window mixture covariance,
// gamma(f) from it, both covariances divided by gamma(f), DP-MWF per bin,
// filter applied to the mixture STFT, inverse STFT. The noise covariance
// comes either from a noise-only signal (oracle) or from an interchange file
// whose factors are already scale-normalized.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>

#include "dpmwf/cholesky_io.hpp"
#include "dpmwf/dp_mwf.hpp"
#include "dpmwf/geometry.hpp"
#include "dpmwf/matrix_field.hpp"
#include "dpmwf/metrics.hpp"
#include "dpmwf/signal.hpp"
#include "dpmwf/spatial_cov.hpp"
#include "dpmwf/stft.hpp"

namespace dpmwf {

struct PipelineConfig {
  StftConfig stft;
  FilterParams filter;
  double epsilon = kDefaultCholeskyFloor;
  double lambda_chol = kDefaultCholeskyWeight;
  double array_diameter = kDefaultArrayDiameter;
  double sound_speed = kSoundSpeed;
  // (left, right) channels for the ILD; defaults to the lateral pair of the
  // circular array.
  std::optional<std::pair<std::size_t, std::size_t>> ild_pair;

  void validate() const;
  ArrayGeometry geometry(std::size_t channels) const;
};

struct EnhanceReport {
  FilterStats filter;
  std::size_t gamma_floored_bins = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t channels = 0;
};

struct EnhanceResult {
  MultichannelSignal output;
  FilterField filter;
  EnhanceReport report;
};

EnhanceResult run_enhance_oracle(const PipelineConfig& config,
                                 const MultichannelSignal& mixture,
                                 const MultichannelSignal& noise);

// Throws kFormat when the file's M, F, T or STFT parameters disagree with
// the mixture and config.
EnhanceResult run_enhance_cholesky(const PipelineConfig& config,
                                   const MultichannelSignal& mixture,
                                   const CholeskyFile& estimate);

// Factor of the scale-normalized oracle noise covariance, diagonal floored
// at config.epsilon, as an estimator would emit it.
CholeskyField oracle_cholesky(const PipelineConfig& config,
                              const MultichannelSignal& mixture,
                              const MultichannelSignal& noise);

struct EvaluationResult {
  double si_sdr_db = 0.0;
  double si_sdr_unprocessed_db = 0.0;
  double nr_db = 0.0;
  SimilarityReport similarity;
  double speech_sim_unprocessed = 0.0;
  std::optional<double> chol_loss;
  std::optional<double> combined_loss;
  double ild_error_db = 0.0;
  double ild_error_unprocessed_db = 0.0;
  double ds_si_sdr_db = 0.0;
  double ds_si_sdr_unprocessed_db = 0.0;
};

// Metrics of `enhanced` against the clean and noise components. The filter
// is re-derived from the mixture using the oracle noise or, if given, the
// estimate. The mixture defaults to clean + noise; pass the stored mixture
// when the estimate was computed from it, since a sum of rounded WAV files
// differs from a rounded sum. The Cholesky loss compares the estimate with
// the oracle factor rounded to the interchange precision.
EvaluationResult run_evaluate(const PipelineConfig& config,
                              const MultichannelSignal& enhanced,
                              const MultichannelSignal& clean,
                              const MultichannelSignal& noise,
                              const CholeskyFile* estimate,
                              double target_azimuth_deg,
                              const MultichannelSignal* mixture = nullptr);

// Two-column CSV "metric,value"; metrics that were not computed are omitted.
void write_metrics_csv(const EvaluationResult& result, std::ostream& out);

}  // namespace dpmwf
