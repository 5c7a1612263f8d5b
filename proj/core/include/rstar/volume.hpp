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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rstar/types.hpp"

namespace rstar {

// Regular voxel grid.  Index order is (z, y, x) with x fastest; the world
// position of voxel centre (iz, iy, ix) is origin + (ix*dx, iy*dy, iz*dz).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  // Grid centred on the world origin.
  static GridSpec centered(int nx, int ny, int nz, const Vec3& spacing) {
    GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    g.spacing = spacing;
    g.origin = {-0.5 * (nx - 1) * spacing.x, -0.5 * (ny - 1) * spacing.y,
                -0.5 * (nz - 1) * spacing.z};
    return g;
  }

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }

  bool operator==(const GridSpec&) const = default;
};

class Volume3D {
public:
  Volume3D() = default;
  explicit Volume3D(const GridSpec& grid, float fill = 0.0f)
      : grid_(grid), data_(grid.voxel_count(), fill) {}

  const GridSpec& grid() const { return grid_; }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }
  int nz() const { return grid_.nz; }

  float& at(int iz, int iy, int ix) {
    return data_[(static_cast<std::size_t>(iz) * grid_.ny + iy) * grid_.nx + ix];
  }
  float at(int iz, int iy, int ix) const {
    return data_[(static_cast<std::size_t>(iz) * grid_.ny + iy) * grid_.nx + ix];
  }

  Vec3 voxel_center(int iz, int iy, int ix) const {
    return {grid_.origin.x + ix * grid_.spacing.x,
            grid_.origin.y + iy * grid_.spacing.y,
            grid_.origin.z + iz * grid_.spacing.z};
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }
  std::size_t size() const { return data_.size(); }

private:
  GridSpec grid_;
  std::vector<float> data_;
};

// Phase-indexed sequence of volumes on one shared grid.
class Volume4D {
public:
  Volume4D() = default;
  Volume4D(const GridSpec& grid, int phases)
      : phases_(static_cast<std::size_t>(phases), Volume3D(grid)) {}

  int phase_count() const { return static_cast<int>(phases_.size()); }
  Volume3D& phase(int i) { return phases_[static_cast<std::size_t>(i)]; }
  const Volume3D& phase(int i) const { return phases_[static_cast<std::size_t>(i)]; }

  void push_back(Volume3D v) {
    if (!phases_.empty() && !(v.grid() == phases_.front().grid()))
      throw DomainError("Volume4D: phases must share one grid");
    phases_.push_back(std::move(v));
  }

  const GridSpec& grid() const {
    if (phases_.empty()) throw DomainError("Volume4D: empty");
    return phases_.front().grid();
  }

private:
  std::vector<Volume3D> phases_;
};

}  // namespace rstar
