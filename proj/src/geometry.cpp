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

#include "dpmwf/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dpmwf/error.hpp"

namespace dpmwf {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double angular_distance(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

ArrayGeometry ArrayGeometry::circular(std::size_t mics, double diameter) {
  if (mics == 0) fail(ErrorKind::kUsage, "array needs at least one mic");
  if (!(diameter >= 0.0)) fail(ErrorKind::kUsage, "negative array diameter");
  ArrayGeometry g;
  const double r = diameter / 2.0;
  for (std::size_t m = 0; m < mics; ++m) {
    const double phi =
        2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(mics);
    g.mic_positions.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
  }
  return g;
}

void ArrayGeometry::validate() const {
  if (mic_positions.empty()) fail(ErrorKind::kUsage, "array has no mics");
  for (std::size_t i = 0; i < mic_positions.size(); ++i) {
    if (!mic_positions[i].allFinite()) {
      fail(ErrorKind::kUsage, "array mic position is not finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((mic_positions[i] - mic_positions[j]).norm() < 1e-9) {
        fail(ErrorKind::kUsage, "array mics are not distinct");
      }
    }
  }
}

std::pair<std::size_t, std::size_t> ArrayGeometry::lateral_pair() const {
  validate();
  if (size() < 2) fail(ErrorKind::kUsage, "lateral pair needs two mics");
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  auto closest = [&](double target, std::size_t exclude) {
    std::size_t best = exclude == 0 ? 1 : 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < size(); ++m) {
      if (m == exclude) continue;
      const double d =
          angular_distance(azimuth_deg(origin, mic_positions[m]), target);
      if (d < best_d - 1e-9) {
        best_d = d;
        best = m;
      }
    }
    return best;
  };
  const std::size_t left = closest(90.0, size());
  const std::size_t right = closest(270.0, left);
  return {left, right};
}

Eigen::Vector3d propagation_direction(double az_deg) {
  const double a = az_deg * kDeg;
  return {-std::cos(a), -std::sin(a), 0.0};
}

double azimuth_deg(const Eigen::Vector3d& origin, const Eigen::Vector3d& point) {
  const Eigen::Vector3d d = point - origin;
  double az = std::atan2(d.y(), d.x()) / kDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  return az;
}

}  // namespace dpmwf
