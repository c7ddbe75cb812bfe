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

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dpmwf {

inline constexpr double kSoundSpeed = 343.0;
inline constexpr std::size_t kDefaultMics = 6;
inline constexpr double kDefaultArrayDiameter = 0.07;

// Microphone positions in meters relative to the array centroid.
struct ArrayGeometry {
  std::vector<Eigen::Vector3d> mic_positions;

  std::size_t size() const { return mic_positions.size(); }

  // M mics equally spaced on a horizontal circle, mic m at azimuth 2 pi m / M.
  static ArrayGeometry circular(std::size_t mics = kDefaultMics,
                                double diameter = kDefaultArrayDiameter);

  // Throws kUsage for an empty array or coincident mics.
  void validate() const;

  // Index pair (left, right) of the mics closest in azimuth to +90 and -90
  // degrees; ties go to the lower index.
  std::pair<std::size_t, std::size_t> lateral_pair() const;
};

// Unit propagation direction of a plane wave arriving from azimuth
// azimuth_deg in the horizontal plane: -(cos az, sin az, 0).
Eigen::Vector3d propagation_direction(double azimuth_deg);

// Azimuth in degrees, [0, 360), of `point` seen from `origin`.
double azimuth_deg(const Eigen::Vector3d& origin, const Eigen::Vector3d& point);

}  // namespace dpmwf
