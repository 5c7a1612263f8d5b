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
#include <filesystem>
#include <string>
#include <vector>

#include "rstar/scan_geometry.hpp"
#include "rstar/volume.hpp"

namespace rstar {

// Binary container formats.  All multi-byte fields are little-endian.
//
// RSV1 volume:
//   magic "RSV1" | u32 nz ny nx | f32 spacing z y x (mm) | f32 origin z y x
//   (mm, centre of voxel (0,0,0)) | f32 voxels, (z,y,x) with x fastest.
//
// RSP1 projection set:
//   magic "RSP1" | geometry: f64 sad sdd det_width det_height, u32 nu nv,
//   f64 offset_u, u32 views_per_turn, f64 rotation_time start_angle,
//   i32 direction | u32 n_views | per view: f64 angle, f64 time, i32 phase |
//   f32 samples, view-major, per view v-major with u fastest.

void write_volume(const std::filesystem::path& path, const Volume3D& vol);
Volume3D read_volume(const std::filesystem::path& path);

void write_projections(const std::filesystem::path& path, const ProjectionSet& proj);
ProjectionSet read_projections(const std::filesystem::path& path);

// Two-column CSV "time_s,amplitude" with a header row.
struct SignalSample {
  double time = 0.0;
  double amplitude = 0.0;
};
void write_signal_csv(const std::filesystem::path& path,
                      const std::vector<SignalSample>& samples);
std::vector<SignalSample> read_signal_csv(const std::filesystem::path& path);

// Generic numeric CSV writer: fixed header, one row per record, values
// rendered with %.9g so reruns are byte-identical.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples as required by the
// format).  Used for quick-look previews of slices and projections.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<std::uint16_t>& pixels);

// Window a float image into 16-bit for preview output.  lo maps to 0 and hi
// to 65535; values outside are clamped.
std::vector<std::uint16_t> window_to_u16(const std::vector<float>& img,
                                         double lo, double hi);

}  // namespace rstar
