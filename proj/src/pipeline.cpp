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

#include "dpmwf/pipeline.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "dpmwf/error.hpp"

namespace dpmwf {

namespace {

void require_input(const PipelineConfig& config, const MultichannelSignal& x,
                   const char* what) {
  if (x.channels() == 0 || x.samples() == 0) {
    fail(ErrorKind::kFormat, std::string(what) + " signal is empty");
  }
  if (x.sample_rate() != config.stft.sample_rate) {
    fail(ErrorKind::kFormat,
         std::string(what) + " sample rate " + std::to_string(x.sample_rate()) +
             " Hz differs from the configured " +
             std::to_string(config.stft.sample_rate) +
             " Hz (resampling is not supported)");
  }
}

void require_aligned(const MultichannelSignal& a, const MultichannelSignal& b,
                     const char* what) {
  if (a.channels() != b.channels() || a.samples() != b.samples()) {
    fail(ErrorKind::kFormat,
         std::string(what) + ": " + std::to_string(a.channels()) + "x" +
             std::to_string(a.samples()) + " vs " +
             std::to_string(b.channels()) + "x" + std::to_string(b.samples()));
  }
}

struct MixtureStats {
  Spectrogram spec;
  ScaleProfile profile;
  CovarianceField rxx;  // normalized
};

MixtureStats mixture_stats(const PipelineConfig& config,
                           const MultichannelSignal& mixture) {
  MixtureStats s;
  s.spec = analyze(mixture, config.stft);
  const CovarianceField raw = sliding_covariance(s.spec, config.filter.window_ms);
  s.profile = scale_profile(raw);
  s.rxx = normalize_covariance(raw, s.profile);
  return s;
}

CovarianceField normalized_oracle_noise(const PipelineConfig& config,
                                        const MultichannelSignal& noise,
                                        const ScaleProfile& profile) {
  const Spectrogram noise_spec = analyze(noise, config.stft);
  return normalize_covariance(
      oracle_noise_covariance(noise_spec, config.filter.window_ms), profile);
}

EnhanceResult finish_enhance(const PipelineConfig& config,
                             const MixtureStats& stats,
                             const CovarianceField& rnn) {
  EnhanceResult result;
  result.filter =
      build_filter_field(stats.rxx, rnn, config.filter, &result.report.filter);
  result.output = synthesize(apply_filter(result.filter, stats.spec));
  for (double v : result.output.data()) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::kNumerical, "enhance: non-finite output sample");
    }
  }
  result.report.gamma_floored_bins = stats.profile.floored_bins;
  result.report.frames = stats.spec.frames();
  result.report.bins = stats.spec.bins();
  result.report.channels = stats.spec.channels();
  return result;
}

void require_matching_estimate(const MixtureStats& stats,
                               const CholeskyFile& estimate,
                               const StftConfig& stft) {
  const auto& L = estimate.field;
  if (L.channels() != stats.spec.channels() || L.bins() != stats.spec.bins() ||
      L.frames() != stats.spec.frames()) {
    fail(ErrorKind::kFormat,
         "cholesky estimate is M=" + std::to_string(L.channels()) +
             " F=" + std::to_string(L.bins()) +
             " T=" + std::to_string(L.frames()) + " but the mixture gives M=" +
             std::to_string(stats.spec.channels()) +
             " F=" + std::to_string(stats.spec.bins()) +
             " T=" + std::to_string(stats.spec.frames()));
  }
  if (!(estimate.stft == stft)) {
    fail(ErrorKind::kFormat, "cholesky estimate was computed with different "
                             "STFT parameters");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  stft.validate();
  filter.validate();
  if (!(epsilon > 0.0)) fail(ErrorKind::kUsage, "epsilon must be > 0");
  if (!(lambda_chol >= 0.0)) fail(ErrorKind::kUsage, "lambda must be >= 0");
  if (!(array_diameter > 0.0)) {
    fail(ErrorKind::kUsage, "array diameter must be > 0");
  }
  if (!(sound_speed > 0.0)) fail(ErrorKind::kUsage, "sound speed must be > 0");
  if (ild_pair && ild_pair->first == ild_pair->second) {
    fail(ErrorKind::kUsage, "ILD channels must differ");
  }
}

ArrayGeometry PipelineConfig::geometry(std::size_t channels) const {
  return ArrayGeometry::circular(channels, array_diameter);
}

EnhanceResult run_enhance_oracle(const PipelineConfig& config,
                                 const MultichannelSignal& mixture,
                                 const MultichannelSignal& noise) {
  config.validate();
  require_input(config, mixture, "mixture");
  require_input(config, noise, "noise");
  require_aligned(mixture, noise, "mixture and noise differ in shape");
  const MixtureStats stats = mixture_stats(config, mixture);
  return finish_enhance(config, stats,
                        normalized_oracle_noise(config, noise, stats.profile));
}

EnhanceResult run_enhance_cholesky(const PipelineConfig& config,
                                   const MultichannelSignal& mixture,
                                   const CholeskyFile& estimate) {
  config.validate();
  require_input(config, mixture, "mixture");
  const MixtureStats stats = mixture_stats(config, mixture);
  require_matching_estimate(stats, estimate, config.stft);
  return finish_enhance(config, stats, reconstruct(estimate.field));
}

CholeskyField oracle_cholesky(const PipelineConfig& config,
                              const MultichannelSignal& mixture,
                              const MultichannelSignal& noise) {
  config.validate();
  require_input(config, mixture, "mixture");
  require_input(config, noise, "noise");
  require_aligned(mixture, noise, "mixture and noise differ in shape");
  const MixtureStats stats = mixture_stats(config, mixture);
  FactorizeResult fr = factorize(
      normalized_oracle_noise(config, noise, stats.profile), config.epsilon);
  floor_diagonal(fr.field);
  return std::move(fr.field);
}

EvaluationResult run_evaluate(const PipelineConfig& config,
                              const MultichannelSignal& enhanced,
                              const MultichannelSignal& clean,
                              const MultichannelSignal& noise,
                              const CholeskyFile* estimate,
                              double target_azimuth_deg,
                              const MultichannelSignal* given_mixture) {
  config.validate();
  require_input(config, enhanced, "enhanced");
  require_input(config, clean, "clean");
  require_input(config, noise, "noise");
  require_aligned(enhanced, clean, "enhanced and clean differ in shape");
  require_aligned(clean, noise, "clean and noise differ in shape");

  MultichannelSignal mixture = clean;
  if (given_mixture) {
    require_input(config, *given_mixture, "mixture");
    require_aligned(*given_mixture, clean, "mixture and clean differ in shape");
    mixture = *given_mixture;
  } else {
    for (std::size_t i = 0; i < mixture.data().size(); ++i) {
      mixture.data()[i] += noise.data()[i];
    }
  }

  const MixtureStats stats = mixture_stats(config, mixture);
  const CovarianceField rnn_oracle =
      normalized_oracle_noise(config, noise, stats.profile);

  EvaluationResult r;
  FilterField w;
  if (estimate) {
    require_matching_estimate(stats, *estimate, config.stft);
    const CovarianceField rnn_est = reconstruct(estimate->field);
    w = build_filter_field(stats.rxx, rnn_est, config.filter);
    r.similarity.cov_sim = field_similarity(rnn_est, rnn_oracle).value;
    r.similarity.has_cov_sim = true;

    FactorizeResult ref = factorize(rnn_oracle, config.epsilon);
    ref.field.set_diag_floor(config.epsilon);
    floor_diagonal(ref.field);
    r.chol_loss =
        cholesky_loss(estimate->field, quantize_cholesky(ref.field)).value;
  } else {
    w = build_filter_field(stats.rxx, rnn_oracle, config.filter);
  }

  r.si_sdr_db = si_sdr(enhanced, clean);
  r.si_sdr_unprocessed_db = si_sdr(mixture, clean);
  if (r.chol_loss) {
    r.combined_loss = combined_loss(r.si_sdr_db, *r.chol_loss,
                                    config.lambda_chol);
  }

  const Spectrogram noise_spec = analyze(noise, config.stft);
  const Spectrogram clean_spec = analyze(clean, config.stft);
  const Spectrogram enhanced_spec = analyze(enhanced, config.stft);
  r.nr_db = noise_reduction(w, noise_spec);

  const double win = config.filter.window_ms;
  const CovarianceField rss =
      sliding_covariance(clean_spec, win, CovarianceTag::kSpeech);
  const CovarianceField ryy =
      sliding_covariance(enhanced_spec, win, CovarianceTag::kOutput);
  const CovarianceField rxx = sliding_covariance(stats.spec, win);
  const CovarianceField rnn =
      oracle_noise_covariance(noise_spec, win);
  const CovarianceField rnn_filtered = sliding_covariance(
      apply_filter(w, noise_spec), win, CovarianceTag::kFilteredNoise);

  const FieldSimilarity speech = field_similarity(ryy, rss);
  r.similarity.speech_sim = speech.value;
  r.similarity.evaluated_bin_count = speech.evaluated_bins;
  r.similarity.skipped_bin_count = speech.skipped_bins;
  r.similarity.noise_sim = field_similarity(rnn_filtered, rnn).value;
  r.speech_sim_unprocessed = field_similarity(rxx, rss).value;

  const ArrayGeometry geometry = config.geometry(clean.channels());
  if (clean.channels() >= 2) {
    const auto [left, right] =
        config.ild_pair ? *config.ild_pair : geometry.lateral_pair();
    if (left >= clean.channels() || right >= clean.channels()) {
      fail(ErrorKind::kUsage, "ILD channel pair out of range");
    }
    const ChannelPair ref{clean.channel(left), clean.channel(right)};
    r.ild_error_db = ild_error({enhanced.channel(left),
                                enhanced.channel(right)}, ref);
    r.ild_error_unprocessed_db = ild_error({mixture.channel(left),
                                            mixture.channel(right)}, ref);
  }

  const SteeringGrid grid =
      SteeringGrid::uniform(360.0, config.stft, geometry, config.sound_speed);
  double az = std::fmod(target_azimuth_deg, 360.0);
  if (az < 0.0) az += 360.0;
  const MultichannelSignal ds_clean =
      synthesize(ds_beamform(clean_spec, az, grid));
  r.ds_si_sdr_db =
      si_sdr(synthesize(ds_beamform(enhanced_spec, az, grid)), ds_clean);
  r.ds_si_sdr_unprocessed_db =
      si_sdr(synthesize(ds_beamform(stats.spec, az, grid)), ds_clean);
  return r;
}

void write_metrics_csv(const EvaluationResult& r, std::ostream& out) {
  const auto old = out.precision(12);
  out << "metric,value\n";
  out << "si_sdr_db," << r.si_sdr_db << '\n';
  out << "si_sdr_unprocessed_db," << r.si_sdr_unprocessed_db << '\n';
  out << "nr_db," << r.nr_db << '\n';
  if (r.similarity.has_cov_sim) out << "cov_sim," << r.similarity.cov_sim << '\n';
  out << "speech_sim," << r.similarity.speech_sim << '\n';
  out << "speech_sim_unprocessed," << r.speech_sim_unprocessed << '\n';
  out << "noise_sim," << r.similarity.noise_sim << '\n';
  if (r.chol_loss) out << "chol_loss," << *r.chol_loss << '\n';
  if (r.combined_loss) out << "combined_loss," << *r.combined_loss << '\n';
  out << "ild_error_db," << r.ild_error_db << '\n';
  out << "ild_error_unprocessed_db," << r.ild_error_unprocessed_db << '\n';
  out << "ds_si_sdr_db," << r.ds_si_sdr_db << '\n';
  out << "ds_si_sdr_unprocessed_db," << r.ds_si_sdr_unprocessed_db << '\n';
  out.precision(old);
}

}  // namespace dpmwf
