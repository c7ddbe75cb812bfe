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

#include "dpmwf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "dpmwf/error.hpp"
#include "dpmwf/spatial_cov.hpp"

namespace dpmwf {

namespace {

double clamp_db(double ratio) {
  if (!(ratio > 0.0)) return -kDbClamp;
  if (std::isinf(ratio)) return kDbClamp;
  return std::clamp(10.0 * std::log10(ratio), -kDbClamp, kDbClamp);
}

void require_same_shape(const MultichannelSignal& y,
                        const MultichannelSignal& s) {
  if (y.channels() != s.channels() || y.samples() != s.samples()) {
    fail(ErrorKind::kUsage, "metrics: signals differ in shape (" +
                                std::to_string(y.channels()) + "x" +
                                std::to_string(y.samples()) + " vs " +
                                std::to_string(s.channels()) + "x" +
                                std::to_string(s.samples()) + ")");
  }
}

}  // namespace

double shared_alpha(const MultichannelSignal& y, const MultichannelSignal& s) {
  require_same_shape(y, s);
  double ys = 0.0;
  double ss = 0.0;
  const auto& yd = y.data();
  const auto& sd = s.data();
  for (std::size_t i = 0; i < sd.size(); ++i) {
    ys += yd[i] * sd[i];
    ss += sd[i] * sd[i];
  }
  if (!(ss > 0.0)) fail(ErrorKind::kUsage, "metrics: zero reference signal");
  return ys / ss;
}

double si_sdr(const MultichannelSignal& y, const MultichannelSignal& s) {
  const double alpha = shared_alpha(y, s);
  double target = 0.0;
  double residual = 0.0;
  const auto& yd = y.data();
  const auto& sd = s.data();
  for (std::size_t i = 0; i < sd.size(); ++i) {
    const double ts = alpha * sd[i];
    const double e = yd[i] - ts;
    target += ts * ts;
    residual += e * e;
  }
  if (residual == 0.0) return target > 0.0 ? kDbClamp : -kDbClamp;
  return clamp_db(target / residual);
}

CholeskyLoss cholesky_loss(const MatrixField& estimate,
                           const MatrixField& reference) {
  if (!estimate.same_shape(reference)) {
    fail(ErrorKind::kUsage, "cholesky_loss: fields differ in shape");
  }
  CholeskyLoss loss;
  double sum = 0.0;
  for (std::size_t t = 0; t < reference.frames(); ++t) {
    for (std::size_t f = 0; f < reference.bins(); ++f) {
      auto L = reference.at(t, f);
      const double norm = L.norm();
      if (norm < kNormFloor) {
        ++loss.skipped_bins;
        continue;
      }
      sum += (estimate.at(t, f) - L).norm() / norm;
      ++loss.evaluated_bins;
    }
  }
  if (loss.evaluated_bins == 0) {
    fail(ErrorKind::kNumerical, "cholesky_loss: every reference bin is zero");
  }
  loss.value = sum / static_cast<double>(loss.evaluated_bins);
  return loss;
}

double combined_loss(double si_sdr_db, double cholesky, double weight) {
  return -si_sdr_db + weight * cholesky;
}

double noise_reduction(const FilterField& w, const Spectrogram& noise) {
  if (w.frames() != noise.frames() || w.bins() != noise.bins() ||
      w.channels() != noise.channels()) {
    fail(ErrorKind::kUsage, "noise_reduction: filter and noise differ in "
                            "shape");
  }
  double in = 0.0;
  double out = 0.0;
  for (std::size_t t = 0; t < noise.frames(); ++t) {
    for (std::size_t f = 0; f < noise.bins(); ++f) {
      auto n = noise.bin(t, f);
      in += n.squaredNorm();
      out += (w.at(t, f) * n).squaredNorm();
    }
  }
  if (!(in > 0.0)) fail(ErrorKind::kUsage, "noise_reduction: zero noise");
  if (out == 0.0) return kDbClamp;
  return clamp_db(in / out);
}

double cosine_sim(const Eigen::MatrixXcd& r1, const Eigen::MatrixXcd& r2) {
  if (r1.rows() != r2.rows() || r1.cols() != r2.cols()) {
    fail(ErrorKind::kUsage, "cosine_sim: matrices differ in size");
  }
  const double n1 = r1.norm();
  const double n2 = r2.norm();
  if (n1 < kNormFloor || n2 < kNormFloor) {
    fail(ErrorKind::kUsage, "cosine_sim: zero-norm operand");
  }
  // Re tr(R1^H R2) = Re sum_ij conj(R1_ij) R2_ij
  const double inner = (r1.conjugate().array() * r2.array()).sum().real();
  return inner / (n1 * n2);
}

FieldSimilarity field_similarity(const MatrixField& a, const MatrixField& b) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::kUsage, "field_similarity: fields differ in shape");
  }
  FieldSimilarity sim;
  double sum = 0.0;
  for (std::size_t t = 0; t < a.frames(); ++t) {
    for (std::size_t f = 0; f < a.bins(); ++f) {
      auto r1 = a.at(t, f);
      auto r2 = b.at(t, f);
      const double n1 = r1.norm();
      const double n2 = r2.norm();
      if (n1 < kNormFloor || n2 < kNormFloor) {
        ++sim.skipped_bins;
        continue;
      }
      sum += (r1.conjugate().array() * r2.array()).sum().real() / (n1 * n2);
      ++sim.evaluated_bins;
    }
  }
  if (sim.evaluated_bins == 0) {
    fail(ErrorKind::kNumerical, "field_similarity: no bin with non-zero "
                                "matrices");
  }
  sim.value = sum / static_cast<double>(sim.evaluated_bins);
  return sim;
}

double ild(std::span<const double> left, std::span<const double> right) {
  double el = 0.0;
  double er = 0.0;
  for (double v : left) el += v * v;
  for (double v : right) er += v * v;
  if (!(el > 0.0) || !(er > 0.0)) {
    fail(ErrorKind::kUsage, "ild: zero-energy channel");
  }
  return 10.0 * std::log10(el / er);
}

double ild_error(const ChannelPair& estimate, const ChannelPair& reference) {
  return std::abs(ild(estimate.left, estimate.right) -
                  ild(reference.left, reference.right));
}

SteeringGrid SteeringGrid::uniform(double step_deg, const StftConfig& config,
                                   const ArrayGeometry& array,
                                   double sound_speed) {
  if (!(step_deg > 0.0) || step_deg > 360.0) {
    fail(ErrorKind::kUsage, "steering grid: step must be in (0, 360]");
  }
  SteeringGrid grid;
  for (std::size_t i = 0;; ++i) {
    const double az = static_cast<double>(i) * step_deg;
    if (az >= 360.0 - 1e-9) break;
    grid.azimuths_deg.push_back(az);
  }
  for (std::size_t k = 0; k < config.num_bins(); ++k) {
    grid.frequencies_hz.push_back(config.bin_frequency(k));
  }
  grid.sound_speed = sound_speed;
  grid.array = array;
  return grid;
}

void SteeringGrid::validate() const {
  array.validate();
  if (azimuths_deg.empty()) fail(ErrorKind::kUsage, "steering grid is empty");
  for (std::size_t i = 0; i < azimuths_deg.size(); ++i) {
    if (azimuths_deg[i] < 0.0 || azimuths_deg[i] >= 360.0 ||
        (i > 0 && azimuths_deg[i] <= azimuths_deg[i - 1])) {
      fail(ErrorKind::kUsage, "steering grid azimuths must increase within "
                              "[0, 360)");
    }
  }
  if (!(sound_speed > 0.0)) fail(ErrorKind::kUsage, "sound speed must be > 0");
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double az_deg,
                                 double frequency_hz, double sound_speed) {
  const Eigen::Vector3d u = propagation_direction(az_deg);
  Eigen::VectorXcd d(static_cast<Eigen::Index>(array.size()));
  for (std::size_t m = 0; m < array.size(); ++m) {
    const double tau = array.mic_positions[m].dot(u) / sound_speed;
    const double phase = -2.0 * std::numbers::pi * frequency_hz * tau;
    d(static_cast<Eigen::Index>(m)) = std::polar(1.0, phase);
  }
  return d;
}

Spectrogram ds_beamform(const Spectrogram& spec, double az_deg,
                        const SteeringGrid& grid) {
  grid.array.validate();
  if (grid.array.size() != spec.channels()) {
    fail(ErrorKind::kUsage, "ds_beamform: array has " +
                                std::to_string(grid.array.size()) +
                                " mics but the signal has " +
                                std::to_string(spec.channels()) + " channels");
  }
  if (grid.frequencies_hz.size() != spec.bins()) {
    fail(ErrorKind::kUsage, "ds_beamform: grid frequencies do not match bins");
  }
  if (!(az_deg >= 0.0 && az_deg < 360.0)) {
    fail(ErrorKind::kUsage, "ds_beamform: azimuth outside [0, 360)");
  }
  Spectrogram out(spec.frames(), 1, spec.config(), spec.num_samples());
  const double inv_m = 1.0 / static_cast<double>(spec.channels());
  for (std::size_t f = 0; f < spec.bins(); ++f) {
    const Eigen::VectorXcd d = steering_vector(grid.array, az_deg,
                                               grid.frequencies_hz[f],
                                               grid.sound_speed);
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      out(t, f, 0) = d.dot(spec.bin(t, f)) * inv_m;  // dot conjugates d
    }
  }
  return out;
}

double SrpMap::band_peak_azimuth(double f_lo_hz, double f_hi_hz) const {
  const std::size_t F = frequencies_hz.size();
  std::vector<double> score(azimuths_deg.size(), 0.0);
  bool any = false;
  for (std::size_t f = 0; f < F; ++f) {
    if (frequencies_hz[f] < f_lo_hz || frequencies_hz[f] > f_hi_hz) continue;
    double peak = 0.0;
    for (std::size_t a = 0; a < azimuths_deg.size(); ++a) {
      peak = std::max(peak, (*this)(a, f));
    }
    if (!(peak > 0.0)) continue;
    any = true;
    for (std::size_t a = 0; a < azimuths_deg.size(); ++a) {
      score[a] += (*this)(a, f) / peak;
    }
  }
  if (!any) fail(ErrorKind::kUsage, "srp map: no energy in requested band");
  const auto it = std::max_element(score.begin(), score.end());
  return azimuths_deg[static_cast<std::size_t>(it - score.begin())];
}

double SrpMap::peak_azimuth(std::size_t f) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < azimuths_deg.size(); ++a) {
    if ((*this)(a, f) > (*this)(best, f)) best = a;
  }
  return azimuths_deg[best];
}

SrpMap srp_map(const Spectrogram& spec, const SteeringGrid& grid,
               double window_ms) {
  grid.validate();
  if (grid.array.size() != spec.channels()) {
    fail(ErrorKind::kUsage, "srp_map: array has " +
                                std::to_string(grid.array.size()) +
                                " mics but the signal has " +
                                std::to_string(spec.channels()) + " channels");
  }
  if (grid.frequencies_hz.size() != spec.bins()) {
    fail(ErrorKind::kUsage, "srp_map: grid frequencies do not match bins");
  }
  const CovarianceField cov = sliding_covariance(spec, window_ms);
  const std::size_t F = spec.bins();
  const std::size_t M = spec.channels();
  SrpMap map;
  map.azimuths_deg = grid.azimuths_deg;
  map.frequencies_hz = grid.frequencies_hz;
  map.values.assign(grid.azimuths_deg.size() * F, 0.0);

  const double inv_norm = 1.0 / std::sqrt(static_cast<double>(M));
  for (std::size_t f = 0; f < F; ++f) {
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(M, M);
    for (std::size_t t = 0; t < spec.frames(); ++t) mean += cov.at(t, f);
    mean /= static_cast<double>(spec.frames());
    for (std::size_t a = 0; a < grid.azimuths_deg.size(); ++a) {
      const Eigen::VectorXcd d =
          steering_vector(grid.array, grid.azimuths_deg[a],
                          grid.frequencies_hz[f], grid.sound_speed) *
          inv_norm;
      map.values[a * F + f] = d.dot(mean * d).real();
    }
  }
  return map;
}

void write_srp_csv(const SrpMap& map, std::ostream& out) {
  const std::size_t F = map.frequencies_hz.size();
  out << std::setprecision(10);
  out << "azimuth_deg";
  for (double f : map.frequencies_hz) out << ',' << f;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t a = 0; a < map.azimuths_deg.size(); ++a) {
    out << map.azimuths_deg[a];
    for (std::size_t f = 0; f < F; ++f) out << ',' << map(a, f);
    out << '\n';
  }
}

void write_srp_pgm(const SrpMap& map, std::ostream& out, double range_db) {
  if (!(range_db > 0.0)) fail(ErrorKind::kUsage, "pgm range must be > 0");
  const std::size_t width = map.frequencies_hz.size();
  const std::size_t height = map.azimuths_deg.size();
  double peak = 0.0;
  for (double v : map.values) peak = std::max(peak, v);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (std::size_t a = 0; a < height; ++a) {
    for (std::size_t f = 0; f < width; ++f) {
      std::uint8_t pixel = 0;
      const double v = map(a, f);
      if (peak > 0.0 && v > 0.0) {
        const double db = 10.0 * std::log10(v / peak);
        const double level = std::clamp((db + range_db) / range_db, 0.0, 1.0);
        pixel = static_cast<std::uint8_t>(std::lround(255.0 * level));
      }
      out.put(static_cast<char>(pixel));
    }
  }
}

}  // namespace dpmwf
