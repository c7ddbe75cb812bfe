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

// Synthetic reverberant scenes: shoebox image-source room impulse responses
// for a microphone array, convolution, and SNR-controlled mixing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dpmwf/geometry.hpp"
#include "dpmwf/signal.hpp"

namespace dpmwf {

inline constexpr std::size_t kFractionalDelayTaps = 81;
inline constexpr std::size_t kDefaultMaxOrder = 6;

// Complete recipe for one scene. Positions are absolute room coordinates in
// meters with one room corner at the origin.
struct SceneSpec {
  Eigen::Vector3d room_dims{5.0, 4.0, 3.0};
  double rt60 = 0.5;
  Eigen::Vector3d array_center{2.5, 2.0, 1.5};
  std::size_t num_mics = kDefaultMics;
  double array_diameter = kDefaultArrayDiameter;
  Eigen::Vector3d speech_source{1.0, 1.0, 1.5};
  std::vector<Eigen::Vector3d> noise_sources;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double duration_s = 2.0;
  std::uint32_t sample_rate = 32000;
  std::size_t max_order = kDefaultMaxOrder;
  double sound_speed = kSoundSpeed;

  // Circular array of num_mics mics, relative to array_center.
  ArrayGeometry geometry() const;
  double target_azimuth_deg() const;
  std::size_t num_samples() const;
  // Source 0 is the speech source, 1.. are the noise sources.
  const Eigen::Vector3d& source(std::size_t index) const;
  std::size_t num_sources() const { return 1 + noise_sources.size(); }

  // Throws kUsage if a source or the array is closer than 0.1 m to a wall,
  // a source is closer than 0.8 m to the array, there are no noise sources,
  // or any scalar is out of range.
  void validate() const;
};

// Sampling ranges for sample_scene. Defaults follow the reference dataset
// recipe, except the room height range and the 2 s duration.
struct SceneSampling {
  double room_min = 4.0;
  double room_max = 8.0;
  double height_min = 2.5;
  double height_max = 3.5;
  double rt60_min = 0.25;
  double rt60_max = 0.75;
  double array_height_min = 1.2;
  double array_height_max = 1.8;
  double source_height_min = 1.0;
  double source_height_max = 2.0;
  double min_source_distance = 0.8;
  double wall_margin = 0.1;
  double snr_min = -5.0;
  double snr_max = 5.0;
  std::size_t noise_min = 1;
  std::size_t noise_max = 3;
  double duration_s = 2.0;
};

// Deterministic in seed. Throws kNumerical if rejection sampling of the
// placements fails 10^4 times in a row.
SceneSpec sample_scene(std::uint64_t seed, const SceneSampling& ranges = {});

// Uniform wall absorption from Sabine's formula 0.1611 V / (S RT60). Throws
// kUsage naming the clamp if the value falls outside (0, 1).
double sabine_absorption(const Eigen::Vector3d& room_dims, double rt60);

// Image of `source` for lattice index n and parity q (each component 0/1):
// (1 - 2q) * s + 2 n * L, component-wise.
Eigen::Vector3d image_source_position(const Eigen::Vector3d& source,
                                      const Eigen::Vector3d& room_dims,
                                      const Eigen::Vector3i& n,
                                      const Eigen::Vector3i& q);

struct RoomImpulseResponse {
  MultichannelSignal taps;                // M x L
  std::vector<double> direct_path_delay;  // samples, fractional, per mic
};

// Image-source RIR for the given source index (0 = speech). Every image with
// at most max_order wall reflections contributes beta^order / (4 pi d) at
// delay d fs / c through an 81-tap Hann-windowed sinc, with
// beta = sqrt(1 - absorption).
RoomImpulseResponse simulate_rir(const SceneSpec& spec,
                                 std::size_t source_index,
                                 const ArrayGeometry& geometry,
                                 std::size_t max_order);

// Linear convolution of a mono signal with each RIR channel, truncated to
// `length` samples.
MultichannelSignal convolve(std::span<const double> signal,
                            const MultichannelSignal& rir, std::size_t length);

// Repeats `signal` until it has `length` samples.
std::vector<double> tile_to_length(std::span<const double> signal,
                                   std::size_t length);

struct RenderedScene {
  MultichannelSignal mixture;
  MultichannelSignal clean;
  MultichannelSignal noise;
  double noise_gain = 1.0;
};

// Convolves speech and noise sources (channel 0 of each input is used),
// scales the summed reverberant noise to spec.snr_db relative to the
// reverberant speech, and forms mixture = clean + noise sample by sample.
RenderedScene render_scene(const SceneSpec& spec,
                           const MultichannelSignal& speech,
                           const std::vector<MultichannelSignal>& noises,
                           const ArrayGeometry& geometry,
                           std::size_t max_order);

// Speech-like test material: voiced syllables with gliding pitch and
// formant-shaped harmonics, separated by pauses. Mono, RMS 0.1.
MultichannelSignal synth_speech(std::uint64_t seed, double duration_s,
                                std::uint32_t sample_rate);

// Stationary colored Gaussian noise with a seed-dependent spectral tilt.
// Mono, RMS 0.1.
MultichannelSignal synth_noise(std::uint64_t seed, double duration_s,
                               std::uint32_t sample_rate);

// Reverberation time from the Schroeder backward integral, extrapolated to
// 60 dB from a line fit between -5 dB and -25 dB.
double schroeder_rt60(std::span<const double> rir, std::uint32_t sample_rate);

// Human-readable "key = value" scene file; see README for the schema.
void write_scene(const SceneSpec& spec, std::ostream& out);
SceneSpec read_scene(std::istream& in);

}  // namespace dpmwf
