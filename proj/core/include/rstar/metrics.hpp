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

#include "rstar/phantom.hpp"
#include "rstar/scan_geometry.hpp"
#include "rstar/volume.hpp"

namespace rstar {

using Mask = std::vector<std::uint8_t>;  // one byte per voxel, same layout

struct SsimOptions {
  int window = 11;           // odd window edge; Gaussian sigma = window/6
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1500.0;  // HU span of the phantom (-1000..500)
};

// Mean SSIM between two volumes over the masked voxels.  Local statistics use
// a separable Gaussian window renormalized at the borders.
double ssim3d(const Volume3D& a, const Volume3D& b, const Mask& mask,
              const SsimOptions& opt = {});

double rmse(const Volume3D& a, const Volume3D& b, const Mask& mask);

// Pearson correlation over the masked voxels.
double pearson_ncc(const Volume3D& a, const Volume3D& b, const Mask& mask);

Mask mask_all(const GridSpec& grid);
std::size_t mask_count(const Mask& mask);

// Largest 6-connected component of voxels above -300 HU, with enclosed
// cavities filled.
Mask body_mask(const Volume3D& hu);

// Air-like voxels (< -400 HU) inside the body, morphologically closed with a
// Euclidean ball of radius 2 voxels; the two largest components are kept.
Mask lung_mask(const Volume3D& hu);

// Exact rasterization of the phantom's tumour parts at one amplitude,
// optionally dilated by margin_mm.
Mask tumor_mask(const Phantom4D& phantom, const GridSpec& grid, double amplitude,
                double margin_mm = 0.0);

// 2D SSIM/Pearson between two detector images (u fastest), Gaussian window as
// in ssim3d; data_range passed explicitly since projections are unbounded.
double ssim2d(const float* a, const float* b, int width, int height,
              double data_range, int window = 11);
double pearson2d(const float* a, const float* b, std::size_t n);

// Per-view projection-domain agreement: each measured view is compared with
// the reprojection of the recovered volume of its phase.  data_range for the
// 2D SSIM is the global min-max span of the measured set.
struct ViewScore {
  double ssim = 0.0;
  double ncc = 0.0;
};
std::vector<ViewScore> projection_domain_eval(const Volume4D& recovered_hu,
                                              const ProjectionSet& measured);

}  // namespace rstar
