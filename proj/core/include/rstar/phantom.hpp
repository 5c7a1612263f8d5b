/*
 * rstar: desk-scale 4D cone-beam CT artifact laboratory
 *
 * Copyright 2026 the rstar developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rstar/types.hpp"
#include "rstar/volume.hpp"

namespace rstar {

enum class Tissue : std::uint8_t { Air, Body, Bone, Lung, Diaphragm, Tumor };

// One ellipsoid of the analytic phantom.  The breathing amplitude a in [0, 1]
// (0 = end-exhale, 1 = end-inhale) displaces the centre by a*motion_mm and
// rescales semi-axis k by (1 + a*axis_scale[k]).
struct Ellipsoid {
  std::string name;
  Tissue tissue = Tissue::Body;
  Vec3 center;            // mm
  Vec3 semi_axes;         // mm
  Vec3 rotation;          // intrinsic Euler angles (rx, ry, rz), rad
  float value_hu = 0.0f;
  Vec3 motion_mm;         // displacement at amplitude 1
  Vec3 axis_scale;        // fractional semi-axis change at amplitude 1

  Vec3 center_at(double a) const { return center + a * motion_mm; }
  Vec3 semi_axes_at(double a) const {
    return {semi_axes.x * (1.0 + a * axis_scale.x),
            semi_axes.y * (1.0 + a * axis_scale.y),
            semi_axes.z * (1.0 + a * axis_scale.z)};
  }
  bool contains(const Vec3& p, double a) const;
};

// Painter's-order ellipsoid phantom: the last part containing a point sets its
// value.  Air (-1000 HU) fills everything outside.
class Phantom4D {
public:
  Phantom4D() = default;
  explicit Phantom4D(std::vector<Ellipsoid> parts) : parts_(std::move(parts)) {}

  const std::vector<Ellipsoid>& parts() const { return parts_; }
  const Ellipsoid* find(const std::string& name) const;

  // Structural sanity: positive semi-axes, angles within [-pi, pi], HU within
  // [-1000, 500], every non-body part inside the body outline over the whole
  // amplitude range, tumour inside its lung.  Throws DomainError.
  void validate() const;

  float value_at(const Vec3& p, double a) const;

  // HU volume at one breathing amplitude; amplitude outside [0, 1] is
  // rejected.  Membership is decided at the voxel centre, deliberately
  // without anti-aliasing.
  Volume3D sample_volume(const GridSpec& grid, double amplitude) const;

  // One volume per entry of `amplitudes` (typically per-phase means).
  Volume4D sample_phases(const GridSpec& grid,
                         const std::vector<double>& amplitudes) const;

private:
  std::vector<Ellipsoid> parts_;
};

// The fixed reference thorax: elliptical body, spine, four rib rods, two
// lungs, a diaphragm dome pushing into the lungs, and a tumour in the right
// lung.  Dome and tumour travel in z with breathing; the lungs breathe
// slightly in scale.
Phantom4D thorax_v1();

// Seeded anatomical variant of thorax_v1 for dataset generation: sizes,
// positions, excursions and contrasts are jittered, then the invariants are
// re-validated (rejection sampling keeps the construction deterministic per
// seed).
Phantom4D thorax_variant(std::uint64_t seed);

constexpr float kAirHu = -1000.0f;

}  // namespace rstar
