/* Copyright 2026 The dpmwf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdpmwf.
 *
 * Every fallible call returns a dpmwf_status. On failure the message is
 * available from dpmwf_last_error() on the same thread until the next call.
 * Output handles are written only on success. Signals are stored channel
 * by channel: sample n of channel m is data[m * samples + n].
 */

#ifndef DPMWF_DPMWF_H_
#define DPMWF_DPMWF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DPMWF_BUILDING_LIBRARY)
#    define DPMWF_API __declspec(dllexport)
#  else
#    define DPMWF_API __declspec(dllimport)
#  endif
#else
#  define DPMWF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpmwf_status {
  DPMWF_OK = 0,
  DPMWF_ERR_USAGE = 2,     /* invalid argument or parameter */
  DPMWF_ERR_FORMAT = 3,    /* malformed or mismatched input data */
  DPMWF_ERR_NUMERICAL = 4,
  DPMWF_ERR_IO = 5,
  DPMWF_ERR_INTERNAL = 6
} dpmwf_status;

DPMWF_API const char* dpmwf_last_error(void);
DPMWF_API const char* dpmwf_version(void);

/* ---- signals ---- */

typedef struct dpmwf_signal dpmwf_signal;

DPMWF_API dpmwf_status dpmwf_signal_create(size_t channels, size_t samples,
                                           uint32_t sample_rate,
                                           dpmwf_signal** out);
DPMWF_API dpmwf_status dpmwf_signal_read_wav(const char* path,
                                             dpmwf_signal** out);
/* 32-bit float WAV, written atomically. */
DPMWF_API dpmwf_status dpmwf_signal_write_wav(const dpmwf_signal* signal,
                                              const char* path);
DPMWF_API size_t dpmwf_signal_channels(const dpmwf_signal* signal);
DPMWF_API size_t dpmwf_signal_samples(const dpmwf_signal* signal);
DPMWF_API uint32_t dpmwf_signal_sample_rate(const dpmwf_signal* signal);
DPMWF_API double* dpmwf_signal_data(dpmwf_signal* signal);
DPMWF_API void dpmwf_signal_destroy(dpmwf_signal* signal);

/* Mono test material, RMS 0.1. */
DPMWF_API dpmwf_status dpmwf_synth_speech(uint64_t seed, double duration_s,
                                          uint32_t sample_rate,
                                          dpmwf_signal** out);
DPMWF_API dpmwf_status dpmwf_synth_noise(uint64_t seed, double duration_s,
                                         uint32_t sample_rate,
                                         dpmwf_signal** out);

/* ---- pipeline configuration ---- */

typedef struct dpmwf_config dpmwf_config;

/* Defaults: 512/256 STFT at 32 kHz, a = 0, mu = 1, nu = 8, 100 ms window,
 * epsilon 1e-5, lambda 10, 7 cm circular array, c = 343 m/s. */
DPMWF_API dpmwf_status dpmwf_config_create(dpmwf_config** out);
DPMWF_API void dpmwf_config_destroy(dpmwf_config* config);
DPMWF_API dpmwf_status dpmwf_config_set_stft(dpmwf_config* config,
                                             size_t frame_size, size_t hop_size,
                                             uint32_t sample_rate);
DPMWF_API dpmwf_status dpmwf_config_set_filter(dpmwf_config* config, double a,
                                               double mu, double nu);
DPMWF_API dpmwf_status dpmwf_config_set_window_ms(dpmwf_config* config,
                                                  double window_ms);
DPMWF_API dpmwf_status dpmwf_config_set_epsilon(dpmwf_config* config,
                                                double epsilon);
DPMWF_API dpmwf_status dpmwf_config_set_lambda(dpmwf_config* config,
                                               double lambda_chol);
DPMWF_API dpmwf_status dpmwf_config_set_array(dpmwf_config* config,
                                              double diameter_m,
                                              double sound_speed);
DPMWF_API dpmwf_status dpmwf_config_set_ild_pair(dpmwf_config* config,
                                                 size_t left, size_t right);
/* Checks every field; setters store values without checking. */
DPMWF_API dpmwf_status dpmwf_config_validate(const dpmwf_config* config);

/* ---- enhancement ---- */

typedef struct dpmwf_enhance_report {
  size_t frames;
  size_t bins;
  size_t channels;
  size_t filter_bins;
  size_t loaded_bins;
  size_t singular_bins;
  size_t trace_clamped_bins;
  size_t gamma_floored_bins;
  double mixing_min;
  double mixing_max;
  double mixing_mean;
} dpmwf_enhance_report;

/* report may be NULL. */
DPMWF_API dpmwf_status dpmwf_enhance_oracle(const dpmwf_config* config,
                                            const dpmwf_signal* mixture,
                                            const dpmwf_signal* noise,
                                            dpmwf_signal** enhanced,
                                            dpmwf_enhance_report* report);
DPMWF_API dpmwf_status dpmwf_enhance_cholesky(const dpmwf_config* config,
                                              const dpmwf_signal* mixture,
                                              const char* cholesky_path,
                                              dpmwf_signal** enhanced,
                                              dpmwf_enhance_report* report);
/* Writes the scale-normalized oracle noise factor as an interchange file. */
DPMWF_API dpmwf_status dpmwf_export_oracle_cholesky(const dpmwf_config* config,
                                                    const dpmwf_signal* mixture,
                                                    const dpmwf_signal* noise,
                                                    const char* path);

/* ---- evaluation ---- */

typedef struct dpmwf_metrics {
  double si_sdr_db;
  double si_sdr_unprocessed_db;
  double nr_db;
  int has_cov_sim;
  double cov_sim;
  double speech_sim;
  double speech_sim_unprocessed;
  double noise_sim;
  size_t evaluated_bins;
  size_t skipped_bins;
  int has_chol_loss;
  double chol_loss;
  double combined_loss;
  double ild_error_db;
  double ild_error_unprocessed_db;
  double ds_si_sdr_db;
  double ds_si_sdr_unprocessed_db;
} dpmwf_metrics;

/* cholesky_path may be NULL for the oracle filter. mixture may be NULL, in
 * which case clean + noise is used. */
DPMWF_API dpmwf_status dpmwf_evaluate(const dpmwf_config* config,
                                      const dpmwf_signal* enhanced,
                                      const dpmwf_signal* clean,
                                      const dpmwf_signal* noise,
                                      const dpmwf_signal* mixture,
                                      const char* cholesky_path,
                                      double target_azimuth_deg,
                                      dpmwf_metrics* out);
/* "metric,value" CSV, written atomically. */
DPMWF_API dpmwf_status dpmwf_metrics_write_csv(const dpmwf_metrics* metrics,
                                               const char* path);

/* ---- scenes ---- */

typedef struct dpmwf_scene dpmwf_scene;

/* Random shoebox scene from the default sampling ranges. */
DPMWF_API dpmwf_status dpmwf_scene_sample(uint64_t seed, double duration_s,
                                          dpmwf_scene** out);
DPMWF_API dpmwf_status dpmwf_scene_read(const char* path, dpmwf_scene** out);
DPMWF_API dpmwf_status dpmwf_scene_write(const dpmwf_scene* scene,
                                         const char* path);
DPMWF_API void dpmwf_scene_destroy(dpmwf_scene* scene);
DPMWF_API size_t dpmwf_scene_num_noise_sources(const dpmwf_scene* scene);
DPMWF_API size_t dpmwf_scene_num_mics(const dpmwf_scene* scene);
DPMWF_API uint32_t dpmwf_scene_sample_rate(const dpmwf_scene* scene);
DPMWF_API double dpmwf_scene_duration(const dpmwf_scene* scene);
DPMWF_API double dpmwf_scene_target_azimuth(const dpmwf_scene* scene);
DPMWF_API double dpmwf_scene_array_diameter(const dpmwf_scene* scene);
DPMWF_API dpmwf_status dpmwf_scene_set_snr(dpmwf_scene* scene, double snr_db);
DPMWF_API dpmwf_status dpmwf_scene_set_max_order(dpmwf_scene* scene,
                                                 size_t max_order);
DPMWF_API dpmwf_status dpmwf_scene_set_sample_rate(dpmwf_scene* scene,
                                                   uint32_t sample_rate);

/* Convolves channel 0 of speech and of each noise source (one signal per
 * noise source, in scene order) and mixes at the scene SNR. */
DPMWF_API dpmwf_status dpmwf_scene_render(const dpmwf_scene* scene,
                                          const dpmwf_signal* speech,
                                          const dpmwf_signal* const* noises,
                                          size_t num_noises,
                                          dpmwf_signal** mixture,
                                          dpmwf_signal** clean,
                                          dpmwf_signal** noise);

/* ---- steered response power ---- */

typedef struct dpmwf_srp_map dpmwf_srp_map;

DPMWF_API dpmwf_status dpmwf_srp_compute(const dpmwf_config* config,
                                         const dpmwf_signal* signal,
                                         double azimuth_step_deg,
                                         dpmwf_srp_map** out);
DPMWF_API void dpmwf_srp_destroy(dpmwf_srp_map* map);
DPMWF_API dpmwf_status dpmwf_srp_write_csv(const dpmwf_srp_map* map,
                                           const char* path);
DPMWF_API dpmwf_status dpmwf_srp_write_pgm(const dpmwf_srp_map* map,
                                           const char* path, double range_db);
DPMWF_API dpmwf_status dpmwf_srp_band_peak(const dpmwf_srp_map* map,
                                           double f_lo_hz, double f_hi_hz,
                                           double* azimuth_deg);

#ifdef __cplusplus
}
#endif

#endif /* DPMWF_DPMWF_H_ */
