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

#include "dpmwf/dpmwf.h"

#include <exception>
#include <istream>
#include <memory>
#include <new>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dpmwf/cholesky_io.hpp"
#include "dpmwf/error.hpp"
#include "dpmwf/file_util.hpp"
#include "dpmwf/metrics.hpp"
#include "dpmwf/pipeline.hpp"
#include "dpmwf/scene.hpp"
#include "dpmwf/wav.hpp"

struct dpmwf_signal {
  dpmwf::MultichannelSignal value;
};

struct dpmwf_config {
  dpmwf::PipelineConfig value;
};

struct dpmwf_scene {
  dpmwf::SceneSpec value;
};

struct dpmwf_srp_map {
  dpmwf::SrpMap value;
};

namespace {

thread_local std::string g_last_error;

dpmwf_status status_of(dpmwf::ErrorKind kind) {
  switch (kind) {
    case dpmwf::ErrorKind::kUsage:
      return DPMWF_ERR_USAGE;
    case dpmwf::ErrorKind::kFormat:
      return DPMWF_ERR_FORMAT;
    case dpmwf::ErrorKind::kNumerical:
      return DPMWF_ERR_NUMERICAL;
    case dpmwf::ErrorKind::kIo:
      return DPMWF_ERR_IO;
  }
  return DPMWF_ERR_INTERNAL;
}

template <typename F>
dpmwf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DPMWF_OK;
  } catch (const dpmwf::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DPMWF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DPMWF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return DPMWF_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) {
    dpmwf::fail(dpmwf::ErrorKind::kUsage, std::string(what) + " is NULL");
  }
}

dpmwf_signal* wrap(dpmwf::MultichannelSignal s) {
  return new dpmwf_signal{std::move(s)};
}

void fill_report(const dpmwf::EnhanceReport& r, dpmwf_enhance_report* out) {
  if (!out) return;
  out->frames = r.frames;
  out->bins = r.bins;
  out->channels = r.channels;
  out->filter_bins = r.filter.bins;
  out->loaded_bins = r.filter.loaded_bins;
  out->singular_bins = r.filter.singular_bins;
  out->trace_clamped_bins = r.filter.trace_clamped_bins;
  out->gamma_floored_bins = r.gamma_floored_bins;
  out->mixing_min = r.filter.mixing_min;
  out->mixing_max = r.filter.mixing_max;
  out->mixing_mean = r.filter.mixing_mean;
}

dpmwf::EvaluationResult from_metrics(const dpmwf_metrics& m) {
  dpmwf::EvaluationResult r;
  r.si_sdr_db = m.si_sdr_db;
  r.si_sdr_unprocessed_db = m.si_sdr_unprocessed_db;
  r.nr_db = m.nr_db;
  r.similarity.has_cov_sim = m.has_cov_sim != 0;
  r.similarity.cov_sim = m.cov_sim;
  r.similarity.speech_sim = m.speech_sim;
  r.similarity.noise_sim = m.noise_sim;
  r.similarity.evaluated_bin_count = m.evaluated_bins;
  r.similarity.skipped_bin_count = m.skipped_bins;
  r.speech_sim_unprocessed = m.speech_sim_unprocessed;
  if (m.has_chol_loss) {
    r.chol_loss = m.chol_loss;
    r.combined_loss = m.combined_loss;
  }
  r.ild_error_db = m.ild_error_db;
  r.ild_error_unprocessed_db = m.ild_error_unprocessed_db;
  r.ds_si_sdr_db = m.ds_si_sdr_db;
  r.ds_si_sdr_unprocessed_db = m.ds_si_sdr_unprocessed_db;
  return r;
}

}  // namespace

extern "C" {

const char* dpmwf_last_error(void) { return g_last_error.c_str(); }

const char* dpmwf_version(void) { return "1.0.0"; }

dpmwf_status dpmwf_signal_create(size_t channels, size_t samples,
                                 uint32_t sample_rate, dpmwf_signal** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap(dpmwf::MultichannelSignal(channels, samples, sample_rate));
  });
}

dpmwf_status dpmwf_signal_read_wav(const char* path, dpmwf_signal** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(dpmwf::read_wav_file(path));
  });
}

dpmwf_status dpmwf_signal_write_wav(const dpmwf_signal* signal,
                                    const char* path) {
  return guarded([&] {
    require(signal, "signal");
    require(path, "path");
    dpmwf::write_wav_file(signal->value, path);
  });
}

size_t dpmwf_signal_channels(const dpmwf_signal* s) {
  return s ? s->value.channels() : 0;
}
size_t dpmwf_signal_samples(const dpmwf_signal* s) {
  return s ? s->value.samples() : 0;
}
uint32_t dpmwf_signal_sample_rate(const dpmwf_signal* s) {
  return s ? s->value.sample_rate() : 0;
}
double* dpmwf_signal_data(dpmwf_signal* s) {
  return s ? s->value.data().data() : nullptr;
}
void dpmwf_signal_destroy(dpmwf_signal* s) { delete s; }

dpmwf_status dpmwf_synth_speech(uint64_t seed, double duration_s,
                                uint32_t sample_rate, dpmwf_signal** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap(dpmwf::synth_speech(seed, duration_s, sample_rate));
  });
}

dpmwf_status dpmwf_synth_noise(uint64_t seed, double duration_s,
                               uint32_t sample_rate, dpmwf_signal** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap(dpmwf::synth_noise(seed, duration_s, sample_rate));
  });
}

dpmwf_status dpmwf_config_create(dpmwf_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dpmwf_config{};
  });
}

void dpmwf_config_destroy(dpmwf_config* config) { delete config; }

dpmwf_status dpmwf_config_set_stft(dpmwf_config* config, size_t frame_size,
                                   size_t hop_size, uint32_t sample_rate) {
  return guarded([&] {
    require(config, "config");
    config->value.stft.frame_size = frame_size;
    config->value.stft.hop_size = hop_size;
    config->value.stft.sample_rate = sample_rate;
  });
}

dpmwf_status dpmwf_config_set_filter(dpmwf_config* config, double a, double mu,
                                     double nu) {
  return guarded([&] {
    require(config, "config");
    config->value.filter.a = a;
    config->value.filter.mu = mu;
    config->value.filter.nu = nu;
  });
}

dpmwf_status dpmwf_config_set_window_ms(dpmwf_config* config,
                                        double window_ms) {
  return guarded([&] {
    require(config, "config");
    config->value.filter.window_ms = window_ms;
  });
}

dpmwf_status dpmwf_config_set_epsilon(dpmwf_config* config, double epsilon) {
  return guarded([&] {
    require(config, "config");
    config->value.epsilon = epsilon;
  });
}

dpmwf_status dpmwf_config_set_lambda(dpmwf_config* config,
                                     double lambda_chol) {
  return guarded([&] {
    require(config, "config");
    config->value.lambda_chol = lambda_chol;
  });
}

dpmwf_status dpmwf_config_set_array(dpmwf_config* config, double diameter_m,
                                    double sound_speed) {
  return guarded([&] {
    require(config, "config");
    config->value.array_diameter = diameter_m;
    config->value.sound_speed = sound_speed;
  });
}

dpmwf_status dpmwf_config_set_ild_pair(dpmwf_config* config, size_t left,
                                       size_t right) {
  return guarded([&] {
    require(config, "config");
    if (left == right) {
      dpmwf::fail(dpmwf::ErrorKind::kUsage, "ILD pair needs two channels");
    }
    config->value.ild_pair = std::make_pair(left, right);
  });
}

dpmwf_status dpmwf_config_validate(const dpmwf_config* config) {
  return guarded([&] {
    require(config, "config");
    config->value.validate();
  });
}

dpmwf_status dpmwf_enhance_oracle(const dpmwf_config* config,
                                  const dpmwf_signal* mixture,
                                  const dpmwf_signal* noise,
                                  dpmwf_signal** enhanced,
                                  dpmwf_enhance_report* report) {
  return guarded([&] {
    require(config, "config");
    require(mixture, "mixture");
    require(noise, "noise source");
    require(enhanced, "enhanced");
    auto result =
        dpmwf::run_enhance_oracle(config->value, mixture->value, noise->value);
    fill_report(result.report, report);
    *enhanced = wrap(std::move(result.output));
  });
}

dpmwf_status dpmwf_enhance_cholesky(const dpmwf_config* config,
                                    const dpmwf_signal* mixture,
                                    const char* cholesky_path,
                                    dpmwf_signal** enhanced,
                                    dpmwf_enhance_report* report) {
  return guarded([&] {
    require(config, "config");
    require(mixture, "mixture");
    require(cholesky_path, "noise source");
    require(enhanced, "enhanced");
    const dpmwf::CholeskyFile file = dpmwf::read_cholesky_file(cholesky_path);
    auto result = dpmwf::run_enhance_cholesky(config->value, mixture->value, file);
    fill_report(result.report, report);
    *enhanced = wrap(std::move(result.output));
  });
}

dpmwf_status dpmwf_export_oracle_cholesky(const dpmwf_config* config,
                                          const dpmwf_signal* mixture,
                                          const dpmwf_signal* noise,
                                          const char* path) {
  return guarded([&] {
    require(config, "config");
    require(mixture, "mixture");
    require(noise, "noise");
    require(path, "path");
    const dpmwf::CholeskyField field =
        dpmwf::oracle_cholesky(config->value, mixture->value, noise->value);
    dpmwf::write_cholesky_file(field, config->value.stft, path);
  });
}

dpmwf_status dpmwf_evaluate(const dpmwf_config* config,
                            const dpmwf_signal* enhanced,
                            const dpmwf_signal* clean,
                            const dpmwf_signal* noise,
                            const dpmwf_signal* mixture,
                            const char* cholesky_path,
                            double target_azimuth_deg, dpmwf_metrics* out) {
  return guarded([&] {
    require(config, "config");
    require(enhanced, "enhanced");
    require(clean, "clean");
    require(noise, "noise");
    require(out, "out");
    std::unique_ptr<dpmwf::CholeskyFile> estimate;
    if (cholesky_path) {
      estimate = std::make_unique<dpmwf::CholeskyFile>(
          dpmwf::read_cholesky_file(cholesky_path));
    }
    const dpmwf::EvaluationResult r =
        dpmwf::run_evaluate(config->value, enhanced->value, clean->value,
                            noise->value, estimate.get(), target_azimuth_deg,
                            mixture ? &mixture->value : nullptr);
    dpmwf_metrics m{};
    m.si_sdr_db = r.si_sdr_db;
    m.si_sdr_unprocessed_db = r.si_sdr_unprocessed_db;
    m.nr_db = r.nr_db;
    m.has_cov_sim = r.similarity.has_cov_sim ? 1 : 0;
    m.cov_sim = r.similarity.cov_sim;
    m.speech_sim = r.similarity.speech_sim;
    m.speech_sim_unprocessed = r.speech_sim_unprocessed;
    m.noise_sim = r.similarity.noise_sim;
    m.evaluated_bins = r.similarity.evaluated_bin_count;
    m.skipped_bins = r.similarity.skipped_bin_count;
    m.has_chol_loss = r.chol_loss ? 1 : 0;
    m.chol_loss = r.chol_loss.value_or(0.0);
    m.combined_loss = r.combined_loss.value_or(0.0);
    m.ild_error_db = r.ild_error_db;
    m.ild_error_unprocessed_db = r.ild_error_unprocessed_db;
    m.ds_si_sdr_db = r.ds_si_sdr_db;
    m.ds_si_sdr_unprocessed_db = r.ds_si_sdr_unprocessed_db;
    *out = m;
  });
}

dpmwf_status dpmwf_metrics_write_csv(const dpmwf_metrics* metrics,
                                     const char* path) {
  return guarded([&] {
    require(metrics, "metrics");
    require(path, "path");
    const dpmwf::EvaluationResult r = from_metrics(*metrics);
    dpmwf::write_file_atomic(
        path, [&](std::ostream& out) { dpmwf::write_metrics_csv(r, out); });
  });
}

dpmwf_status dpmwf_scene_sample(uint64_t seed, double duration_s,
                                dpmwf_scene** out) {
  return guarded([&] {
    require(out, "out");
    dpmwf::SceneSampling ranges;
    ranges.duration_s = duration_s;
    *out = new dpmwf_scene{dpmwf::sample_scene(seed, ranges)};
  });
}

dpmwf_status dpmwf_scene_read(const char* path, dpmwf_scene** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    dpmwf::SceneSpec spec;
    dpmwf::read_file(path, [&](std::istream& in) { spec = dpmwf::read_scene(in); });
    *out = new dpmwf_scene{std::move(spec)};
  });
}

dpmwf_status dpmwf_scene_write(const dpmwf_scene* scene, const char* path) {
  return guarded([&] {
    require(scene, "scene");
    require(path, "path");
    dpmwf::write_file_atomic(
        path, [&](std::ostream& out) { dpmwf::write_scene(scene->value, out); });
  });
}

void dpmwf_scene_destroy(dpmwf_scene* scene) { delete scene; }

size_t dpmwf_scene_num_noise_sources(const dpmwf_scene* s) {
  return s ? s->value.noise_sources.size() : 0;
}
size_t dpmwf_scene_num_mics(const dpmwf_scene* s) {
  return s ? s->value.num_mics : 0;
}
uint32_t dpmwf_scene_sample_rate(const dpmwf_scene* s) {
  return s ? s->value.sample_rate : 0;
}
double dpmwf_scene_duration(const dpmwf_scene* s) {
  return s ? s->value.duration_s : 0.0;
}
double dpmwf_scene_target_azimuth(const dpmwf_scene* s) {
  return s ? s->value.target_azimuth_deg() : 0.0;
}
double dpmwf_scene_array_diameter(const dpmwf_scene* s) {
  return s ? s->value.array_diameter : 0.0;
}

dpmwf_status dpmwf_scene_set_snr(dpmwf_scene* scene, double snr_db) {
  return guarded([&] {
    require(scene, "scene");
    auto next = scene->value;  // left untouched on failure
    next.snr_db = snr_db;
    next.validate();
    scene->value = next;
  });
}

dpmwf_status dpmwf_scene_set_max_order(dpmwf_scene* scene, size_t max_order) {
  return guarded([&] {
    require(scene, "scene");
    auto next = scene->value;  // left untouched on failure
    next.max_order = max_order;
    next.validate();
    scene->value = next;
  });
}

dpmwf_status dpmwf_scene_set_sample_rate(dpmwf_scene* scene,
                                         uint32_t sample_rate) {
  return guarded([&] {
    require(scene, "scene");
    auto next = scene->value;  // left untouched on failure
    next.sample_rate = sample_rate;
    next.validate();
    scene->value = next;
  });
}

dpmwf_status dpmwf_scene_render(const dpmwf_scene* scene,
                                const dpmwf_signal* speech,
                                const dpmwf_signal* const* noises,
                                size_t num_noises, dpmwf_signal** mixture,
                                dpmwf_signal** clean, dpmwf_signal** noise) {
  return guarded([&] {
    require(scene, "scene");
    require(speech, "speech source");
    require(mixture, "mixture");
    require(clean, "clean");
    require(noise, "noise");
    if (num_noises > 0) require(noises, "noises");
    std::vector<dpmwf::MultichannelSignal> noise_signals;
    for (size_t i = 0; i < num_noises; ++i) {
      require(noises[i], "noise source");
      noise_signals.push_back(noises[i]->value);
    }
    const auto& spec = scene->value;
    dpmwf::RenderedScene r = dpmwf::render_scene(
        spec, speech->value, noise_signals, spec.geometry(), spec.max_order);
    *mixture = wrap(std::move(r.mixture));
    *clean = wrap(std::move(r.clean));
    *noise = wrap(std::move(r.noise));
  });
}

dpmwf_status dpmwf_srp_compute(const dpmwf_config* config,
                               const dpmwf_signal* signal,
                               double azimuth_step_deg, dpmwf_srp_map** out) {
  return guarded([&] {
    require(config, "config");
    require(signal, "signal");
    require(out, "out");
    const auto& cfg = config->value;
    cfg.validate();
    if (signal->value.sample_rate() != cfg.stft.sample_rate) {
      dpmwf::fail(dpmwf::ErrorKind::kFormat,
                  "signal sample rate differs from the configured rate");
    }
    const dpmwf::SteeringGrid grid = dpmwf::SteeringGrid::uniform(
        azimuth_step_deg, cfg.stft, cfg.geometry(signal->value.channels()),
        cfg.sound_speed);
    const dpmwf::Spectrogram spec = dpmwf::analyze(signal->value, cfg.stft);
    *out = new dpmwf_srp_map{dpmwf::srp_map(spec, grid, cfg.filter.window_ms)};
  });
}

void dpmwf_srp_destroy(dpmwf_srp_map* map) { delete map; }

dpmwf_status dpmwf_srp_write_csv(const dpmwf_srp_map* map, const char* path) {
  return guarded([&] {
    require(map, "map");
    require(path, "path");
    dpmwf::write_file_atomic(
        path, [&](std::ostream& out) { dpmwf::write_srp_csv(map->value, out); });
  });
}

dpmwf_status dpmwf_srp_write_pgm(const dpmwf_srp_map* map, const char* path,
                                 double range_db) {
  return guarded([&] {
    require(map, "map");
    require(path, "path");
    dpmwf::write_file_atomic(path, [&](std::ostream& out) {
      dpmwf::write_srp_pgm(map->value, out, range_db);
    });
  });
}

dpmwf_status dpmwf_srp_band_peak(const dpmwf_srp_map* map, double f_lo_hz,
                                 double f_hi_hz, double* azimuth_deg) {
  return guarded([&] {
    require(map, "map");
    require(azimuth_deg, "azimuth_deg");
    *azimuth_deg = map->value.band_peak_azimuth(f_lo_hz, f_hi_hz);
  });
}

}  // extern "C"
