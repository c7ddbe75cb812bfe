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

#include "dpmwf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "dpmwf/error.hpp"
#include "fft.hpp"

namespace dpmwf {

namespace {

constexpr int kAttempts = 10000;
constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool inside(const Eigen::Vector3d& p, const Eigen::Vector3d& room,
            double margin) {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < margin - 1e-12 || p[i] > room[i] - margin + 1e-12) return false;
  }
  return true;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

ArrayGeometry SceneSpec::geometry() const {
  return ArrayGeometry::circular(num_mics, array_diameter);
}

double SceneSpec::target_azimuth_deg() const {
  return azimuth_deg(array_center, speech_source);
}

std::size_t SceneSpec::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

const Eigen::Vector3d& SceneSpec::source(std::size_t index) const {
  if (index == 0) return speech_source;
  if (index - 1 >= noise_sources.size()) {
    fail(ErrorKind::kUsage, "scene: source index " + std::to_string(index) +
                                " out of range");
  }
  return noise_sources[index - 1];
}

void SceneSpec::validate() const {
  if (!room_dims.allFinite() || room_dims.minCoeff() <= 0.2) {
    fail(ErrorKind::kUsage, "scene: room dimensions must exceed 0.2 m");
  }
  if (!(rt60 > 0.0)) fail(ErrorKind::kUsage, "scene: rt60 must be > 0");
  if (noise_sources.empty()) {
    fail(ErrorKind::kUsage, "scene: at least one noise source is required");
  }
  if (num_mics == 0) fail(ErrorKind::kUsage, "scene: no microphones");
  if (!(array_diameter >= 0.0)) {
    fail(ErrorKind::kUsage, "scene: negative array diameter");
  }
  if (!(duration_s > 0.0) || sample_rate == 0) {
    fail(ErrorKind::kUsage, "scene: duration and sample rate must be > 0");
  }
  if (!(sound_speed > 0.0)) fail(ErrorKind::kUsage, "scene: sound speed <= 0");
  if (!std::isfinite(snr_db)) fail(ErrorKind::kUsage, "scene: snr not finite");
  const double margin = 0.1;
  for (const auto& mic : geometry().mic_positions) {
    if (!inside(array_center + mic, room_dims, margin)) {
      fail(ErrorKind::kUsage, "scene: array closer than 0.1 m to a wall");
    }
  }
  for (std::size_t i = 0; i < num_sources(); ++i) {
    const auto& s = source(i);
    if (!inside(s, room_dims, margin)) {
      fail(ErrorKind::kUsage, "scene: source " + std::to_string(i) +
                                  " closer than 0.1 m to a wall");
    }
    if ((s - array_center).norm() < 0.8 - 1e-12) {
      fail(ErrorKind::kUsage, "scene: source " + std::to_string(i) +
                                  " closer than 0.8 m to the array");
    }
  }
}

SceneSpec sample_scene(std::uint64_t seed, const SceneSampling& r) {
  std::mt19937_64 rng(seed);
  SceneSpec spec;
  spec.seed = seed;
  spec.duration_s = r.duration_s;

  const double radius = kDefaultArrayDiameter / 2.0;
  int attempts = 0;
  for (;; ++attempts) {
    if (attempts >= kAttempts) {
      fail(ErrorKind::kNumerical, "sample_scene: no feasible room/RT60 after "
                                  "10^4 attempts");
    }
    spec.room_dims = {uniform(rng, r.room_min, r.room_max),
                      uniform(rng, r.room_min, r.room_max),
                      uniform(rng, r.height_min, r.height_max)};
    spec.rt60 = uniform(rng, r.rt60_min, r.rt60_max);
    const Eigen::Vector3d& L = spec.room_dims;
    const double S = 2.0 * (L.x() * L.y() + L.x() * L.z() + L.y() * L.z());
    const double alpha = 0.1611 * L.prod() / (S * spec.rt60);
    if (alpha > 0.0 && alpha < 1.0) break;
  }
  spec.snr_db = uniform(rng, r.snr_min, r.snr_max);
  const std::size_t n_noise = std::uniform_int_distribution<std::size_t>(
      r.noise_min, r.noise_max)(rng);

  const Eigen::Vector3d& L = spec.room_dims;
  const double edge = r.wall_margin + radius;
  spec.array_center = {uniform(rng, edge, L.x() - edge),
                       uniform(rng, edge, L.y() - edge),
                       uniform(rng, r.array_height_min, r.array_height_max)};

  auto place_source = [&]() {
    for (int i = 0; i < kAttempts; ++i) {
      Eigen::Vector3d p{uniform(rng, r.wall_margin, L.x() - r.wall_margin),
                        uniform(rng, r.wall_margin, L.y() - r.wall_margin),
                        uniform(rng, r.source_height_min, r.source_height_max)};
      if ((p - spec.array_center).norm() >= r.min_source_distance) return p;
    }
    fail(ErrorKind::kNumerical, "sample_scene: source placement failed after "
                                "10^4 attempts");
  };
  spec.speech_source = place_source();
  for (std::size_t i = 0; i < n_noise; ++i) {
    spec.noise_sources.push_back(place_source());
  }
  return spec;
}

double sabine_absorption(const Eigen::Vector3d& room, double rt60) {
  if (!(rt60 > 0.0)) fail(ErrorKind::kUsage, "rt60 must be > 0");
  const double V = room.prod();
  const double S =
      2.0 * (room.x() * room.y() + room.x() * room.z() + room.y() * room.z());
  const double alpha = 0.1611 * V / (S * rt60);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorKind::kUsage,
         "rt60 " + std::to_string(rt60) +
             " s is unreachable in this room: Sabine absorption " +
             std::to_string(alpha) + " falls outside the clamp (0, 1)");
  }
  return alpha;
}

Eigen::Vector3d image_source_position(const Eigen::Vector3d& source,
                                      const Eigen::Vector3d& room,
                                      const Eigen::Vector3i& n,
                                      const Eigen::Vector3i& q) {
  Eigen::Vector3d p;
  for (int i = 0; i < 3; ++i) {
    p[i] = (1.0 - 2.0 * q[i]) * source[i] + 2.0 * n[i] * room[i];
  }
  return p;
}

RoomImpulseResponse simulate_rir(const SceneSpec& spec,
                                 std::size_t source_index,
                                 const ArrayGeometry& geometry,
                                 std::size_t max_order) {
  geometry.validate();
  const Eigen::Vector3d& src = spec.source(source_index);
  const double alpha = sabine_absorption(spec.room_dims, spec.rt60);
  const double beta = std::sqrt(1.0 - alpha);
  const double fs = spec.sample_rate;
  const double c = spec.sound_speed;
  const int N = static_cast<int>(max_order);
  const int half = static_cast<int>(kFractionalDelayTaps / 2);

  struct Image {
    Eigen::Vector3d position;
    double gain;
  };
  std::vector<Image> images;
  for (int nx = -N; nx <= N; ++nx) {
    for (int ny = -N; ny <= N; ++ny) {
      for (int nz = -N; nz <= N; ++nz) {
        for (int qx = 0; qx <= 1; ++qx) {
          for (int qy = 0; qy <= 1; ++qy) {
            for (int qz = 0; qz <= 1; ++qz) {
              const int order = std::abs(2 * nx - qx) + std::abs(2 * ny - qy) +
                                std::abs(2 * nz - qz);
              if (order > N) continue;
              images.push_back(
                  {image_source_position(src, spec.room_dims, {nx, ny, nz},
                                         {qx, qy, qz}),
                   std::pow(beta, order)});
            }
          }
        }
      }
    }
  }

  std::vector<Eigen::Vector3d> mics;
  for (const auto& m : geometry.mic_positions) {
    mics.push_back(spec.array_center + m);
  }
  double max_delay = 0.0;
  for (const auto& img : images) {
    for (const auto& mic : mics) {
      max_delay = std::max(max_delay, (img.position - mic).norm() * fs / c);
    }
  }
  const std::size_t length =
      static_cast<std::size_t>(std::ceil(max_delay)) + half + 2;

  RoomImpulseResponse rir;
  rir.taps = MultichannelSignal(mics.size(), length, spec.sample_rate);
  for (std::size_t m = 0; m < mics.size(); ++m) {
    rir.direct_path_delay.push_back((src - mics[m]).norm() * fs / c);
    auto h = rir.taps.channel(m);
    for (const auto& img : images) {
      const double dist = (img.position - mics[m]).norm();
      const double delay = dist * fs / c;
      const double amp = img.gain / (4.0 * kPi * dist);
      const long centre = static_cast<long>(std::floor(delay));
      for (long n = centre - half; n <= centre + half; ++n) {
        if (n < 0 || n >= static_cast<long>(length)) continue;
        const double x = static_cast<double>(n) - delay;
        const double w = 0.5 * (1.0 + std::cos(kPi * x / (half + 1)));
        h[static_cast<std::size_t>(n)] += amp * w * sinc(x);
      }
    }
  }
  return rir;
}

MultichannelSignal convolve(std::span<const double> signal,
                            const MultichannelSignal& rir, std::size_t length) {
  MultichannelSignal out(rir.channels(), length, rir.sample_rate());
  if (signal.empty() || rir.samples() == 0 || length == 0) return out;
  const std::size_t nfft = next_pow2(signal.size() + rir.samples() - 1);
  detail::RealFft fft(nfft);
  std::vector<std::complex<double>> X(fft.num_bins());
  std::vector<std::complex<double>> H(fft.num_bins());
  std::vector<double> y(nfft);
  fft.forward(signal, X);
  for (std::size_t m = 0; m < rir.channels(); ++m) {
    fft.forward(rir.channel(m), H);
    for (std::size_t k = 0; k < H.size(); ++k) H[k] *= X[k];
    fft.inverse(H, y);
    auto o = out.channel(m);
    const std::size_t n = std::min(length, nfft);
    std::copy(y.begin(), y.begin() + static_cast<long>(n), o.begin());
  }
  return out;
}

std::vector<double> tile_to_length(std::span<const double> signal,
                                   std::size_t length) {
  if (signal.empty()) fail(ErrorKind::kUsage, "cannot tile an empty signal");
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = signal[i % signal.size()];
  return out;
}

RenderedScene render_scene(const SceneSpec& spec,
                           const MultichannelSignal& speech,
                           const std::vector<MultichannelSignal>& noises,
                           const ArrayGeometry& geometry,
                           std::size_t max_order) {
  if (noises.empty()) {
    fail(ErrorKind::kUsage, "render_scene: no noise signals given");
  }
  if (noises.size() != spec.noise_sources.size()) {
    fail(ErrorKind::kUsage, "render_scene: " + std::to_string(noises.size()) +
                                " noise signals for " +
                                std::to_string(spec.noise_sources.size()) +
                                " noise sources");
  }
  spec.validate();
  auto check_source = [&](const MultichannelSignal& s, const char* what) {
    if (s.channels() == 0 || s.samples() == 0 || !(s.energy() > 0.0)) {
      fail(ErrorKind::kUsage, std::string("render_scene: zero-energy ") + what);
    }
    if (s.sample_rate() != 0 && s.sample_rate() != spec.sample_rate) {
      fail(ErrorKind::kUsage, std::string("render_scene: ") + what +
                                  " sample rate differs from the scene");
    }
  };
  check_source(speech, "speech signal");
  for (const auto& n : noises) check_source(n, "noise signal");

  const std::size_t N = spec.num_samples();
  RenderedScene scene;
  {
    const auto rir = simulate_rir(spec, 0, geometry, max_order);
    scene.clean = convolve(tile_to_length(speech.channel(0), N), rir.taps, N);
  }
  MultichannelSignal noise_sum(geometry.size(), N, spec.sample_rate);
  for (std::size_t i = 0; i < noises.size(); ++i) {
    const auto rir = simulate_rir(spec, i + 1, geometry, max_order);
    const auto part =
        convolve(tile_to_length(noises[i].channel(0), N), rir.taps, N);
    for (std::size_t k = 0; k < part.data().size(); ++k) {
      noise_sum.data()[k] += part.data()[k];
    }
  }
  const double es = scene.clean.energy();
  const double en = noise_sum.energy();
  if (!(es > 0.0) || !(en > 0.0)) {
    fail(ErrorKind::kNumerical, "render_scene: reverberant signal has zero "
                                "energy");
  }
  scene.noise_gain = std::sqrt(es / (en * std::pow(10.0, spec.snr_db / 10.0)));
  scene.noise = std::move(noise_sum);
  for (double& v : scene.noise.data()) v *= scene.noise_gain;
  scene.mixture = MultichannelSignal(geometry.size(), N, spec.sample_rate);
  for (std::size_t k = 0; k < scene.mixture.data().size(); ++k) {
    scene.mixture.data()[k] = scene.clean.data()[k] + scene.noise.data()[k];
  }
  return scene;
}

namespace {

void normalize_rms(std::vector<double>& x, double rms) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = rms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

}  // namespace

MultichannelSignal synth_speech(std::uint64_t seed, double duration_s,
                                std::uint32_t sample_rate) {
  if (!(duration_s > 0.0) || sample_rate == 0) {
    fail(ErrorKind::kUsage, "synth_speech: duration and rate must be > 0");
  }
  const double fs = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::mt19937_64 rng(seed ^ 0x5eec5eecULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n, 0.0);

  std::size_t pos = static_cast<std::size_t>(uniform(rng, 0.02, 0.1) * fs);
  while (pos < n) {
    const auto len = static_cast<std::size_t>(uniform(rng, 0.15, 0.32) * fs);
    const double f0_start = uniform(rng, 95.0, 230.0);
    const double f0_end = f0_start * uniform(rng, 0.8, 1.2);
    const double formants[3] = {uniform(rng, 300.0, 900.0),
                                uniform(rng, 900.0, 2400.0),
                                uniform(rng, 2400.0, 3500.0)};
    const double level = uniform(rng, 0.5, 1.0);
    double phase = 0.0;
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      const double f0 = f0_start + (f0_end - f0_start) * u;
      phase += 2.0 * kPi * f0 / fs;
      const double env = std::sin(kPi * u);
      double v = 0.0;
      for (int h = 1; f0 * h < std::min(5000.0, fs / 2.0); ++h) {
        const double fh = f0 * h;
        double gain = 0.02;
        for (int k = 0; k < 3; ++k) {
          const double bw = 80.0 + 40.0 * k;
          const double d = (fh - formants[k]) / bw;
          gain += (k == 0 ? 1.0 : 0.5 / k) / (1.0 + d * d);
        }
        v += gain * std::sin(h * phase);
      }
      v += 0.02 * gauss(rng);
      x[pos + i] += level * env * env * v;
    }
    pos += len + static_cast<std::size_t>(uniform(rng, 0.05, 0.25) * fs);
  }
  normalize_rms(x, 0.1);
  MultichannelSignal out(1, n, sample_rate);
  std::copy(x.begin(), x.end(), out.channel(0).begin());
  return out;
}

MultichannelSignal synth_noise(std::uint64_t seed, double duration_s,
                               std::uint32_t sample_rate) {
  if (!(duration_s > 0.0) || sample_rate == 0) {
    fail(ErrorKind::kUsage, "synth_noise: duration and rate must be > 0");
  }
  const auto n =
      static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::mt19937_64 rng(seed ^ 0x9015e9015eULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double pole = uniform(rng, 0.5, 0.97);
  const double white = uniform(rng, 0.1, 0.5);
  std::vector<double> x(n);
  double state = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = gauss(rng);
    state = pole * state + (1.0 - pole) * w;
    x[i] = state + white * (1.0 - pole) * w;
  }
  normalize_rms(x, 0.1);
  MultichannelSignal out(1, n, sample_rate);
  std::copy(x.begin(), x.end(), out.channel(0).begin());
  return out;
}

double schroeder_rt60(std::span<const double> rir, std::uint32_t sample_rate) {
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (!(acc > 0.0)) fail(ErrorKind::kUsage, "schroeder_rt60: silent RIR");
  // Least-squares slope of the decay curve (dB) between -5 and -25 dB.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / acc);
    if (db > -5.0) continue;
    if (db < -25.0) break;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (count < 2) fail(ErrorKind::kUsage, "schroeder_rt60: decay too short");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  if (!(slope < 0.0)) fail(ErrorKind::kNumerical, "schroeder_rt60: no decay");
  return -60.0 / slope;
}

}  // namespace dpmwf
