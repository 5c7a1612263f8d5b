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
#include <vector>

#include "rstar/types.hpp"

namespace rstar {

// Circular cone-beam geometry with a flat detector.  The source orbits in the
// z = 0 plane; at gantry angle b the source sits at
//   s(b) = (sad*cos b, sad*sin b, 0)
// and the detector centre line is displaced by offset_u along the in-plane
// detector axis u (half-fan shift).  v is parallel to z.
struct ScanGeometry {
  double sad = 1000.0;        // source-axis distance, mm
  double sdd = 1500.0;        // source-detector distance, mm
  double det_width = 397.0;   // physical detector width, mm
  double det_height = 298.0;  // physical detector height, mm
  std::uint32_t nu = 256;     // channels along u
  std::uint32_t nv = 192;     // channels along v
  double offset_u = 0.0;      // lateral detector shift, mm (0 = full fan)
  std::uint32_t views_per_turn = 240;
  double rotation_time = 60.0;  // seconds per full turn
  double start_angle = 0.0;     // rad
  std::int32_t direction = 1;   // +1 counter-clockwise, -1 clockwise

  double du() const { return det_width / nu; }
  double dv() const { return det_height / nv; }

  // Detector coordinate (mm, physical plane) of channel centre iu/iv.
  // u runs with the channel index; the offset shifts the whole array.
  double u_at(double iu) const {
    return (iu + 0.5) * du() - 0.5 * det_width + offset_u;
  }
  double v_at(double iv) const { return (iv + 0.5) * dv() - 0.5 * det_height; }

  void validate() const {
    if (!(sad > 0.0) || !(sdd > sad)) throw DomainError("geometry: need 0 < sad < sdd");
    if (nu == 0 || nv == 0) throw DomainError("geometry: empty detector");
    if (!(det_width > 0.0) || !(det_height > 0.0))
      throw DomainError("geometry: non-positive detector size");
    if (views_per_turn == 0) throw DomainError("geometry: views_per_turn == 0");
    if (!(rotation_time > 0.0)) throw DomainError("geometry: rotation_time <= 0");
    if (direction != 1 && direction != -1) throw DomainError("geometry: direction must be +-1");
    if (std::abs(offset_u) >= 0.5 * det_width)
      throw DomainError("geometry: |offset_u| must stay below half the detector width");
  }

  bool operator==(const ScanGeometry&) const = default;
};

struct ViewInfo {
  double angle = 0.0;  // gantry angle, rad
  double time = 0.0;   // acquisition time, s
  std::int32_t phase = -1;  // respiratory phase label, -1 = unassigned
};

// A stack of cone-beam views.  Per view the detector is stored v-major with u
// fastest; views are concatenated in acquisition order.
class ProjectionSet {
public:
  ProjectionSet() = default;
  ProjectionSet(const ScanGeometry& g, std::size_t n_views)
      : geometry_(g),
        views_(n_views),
        data_(n_views * g.nu * g.nv, 0.0f) {}

  const ScanGeometry& geometry() const { return geometry_; }
  std::size_t view_count() const { return views_.size(); }

  ViewInfo& view(std::size_t i) { return views_[i]; }
  const ViewInfo& view(std::size_t i) const { return views_[i]; }
  std::vector<ViewInfo>& views() { return views_; }
  const std::vector<ViewInfo>& views() const { return views_; }

  std::size_t view_stride() const {
    return static_cast<std::size_t>(geometry_.nu) * geometry_.nv;
  }
  float* view_data(std::size_t i) { return data_.data() + i * view_stride(); }
  const float* view_data(std::size_t i) const { return data_.data() + i * view_stride(); }

  float& at(std::size_t view, std::uint32_t iv, std::uint32_t iu) {
    return data_[view * view_stride() + static_cast<std::size_t>(iv) * geometry_.nu + iu];
  }
  float at(std::size_t view, std::uint32_t iv, std::uint32_t iu) const {
    return data_[view * view_stride() + static_cast<std::size_t>(iv) * geometry_.nu + iu];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

private:
  ScanGeometry geometry_;
  std::vector<ViewInfo> views_;
  std::vector<float> data_;
};

}  // namespace rstar
