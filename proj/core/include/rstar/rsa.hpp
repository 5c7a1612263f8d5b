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

#include <utility>
#include <vector>

#include "rstar/metrics.hpp"
#include "rstar/scan_geometry.hpp"
#include "rstar/volume.hpp"

namespace rstar {

// Tools for characterizing the rotational streak artifacts of phase-gated
// reconstructions: how each phase samples the gantry circle, which way the
// resulting streaks point, and how apparent motion in the image sequence
// splits into respiratory and artifact components.

// ---------- angular sampling ----------

struct AngularGap {
  double start = 0.0;   // rad, [0, 2*pi)
  double extent = 0.0;  // rad
  double center() const { return start + 0.5 * extent; }
};

struct PhaseSampling {
  std::vector<double> angles;  // sorted view angles mod 2*pi
  std::vector<AngularGap> gaps;
  double max_gap = 0.0;  // rad
  // Orientation (rad, [0, pi)) of the extent-weighted doubled-angle circular
  // mean of gap centres, with the resultant length of that mean (0 = no
  // dominant orientation, 1 = fully concentrated).
  double gap_orientation = 0.0;
  double gap_resultant = 0.0;
};

// One record per phase label in [0, n_phases).
std::vector<PhaseSampling> sampling_patterns(const ProjectionSet& proj,
                                             int n_phases);

// Number of clusters in a sorted angle list: runs separated by circular gaps
// larger than `gap_threshold` (rad).  A list without such gaps is 1 cluster.
int count_angle_clusters(const std::vector<double>& sorted_angles,
                         double gap_threshold);

// ---------- circular orientation statistics ----------

struct OrientationMean {
  double orientation = 0.0;  // rad, [0, pi)
  double resultant = 0.0;    // in [0, 1]
};

// Weighted circular mean of pi-periodic orientations (doubled-angle method).
OrientationMean circular_orientation_mean(const std::vector<double>& orientations,
                                          const std::vector<double>& weights);

// Phase locking of two orientation sequences: |mean exp(2i(a_k - b_k))|.
// 1 means the sequences advance together up to a constant offset.
double circular_correlation(const std::vector<double>& a,
                            const std::vector<double>& b);

// ---------- streak orientation ----------

struct StreakOrientation {
  double orientation = 0.0;          // image-domain streak direction, rad [0, pi)
  std::vector<double> wedge_energy;  // 36 wedges of 5 degrees over [0, pi)
};

// Dominant streak orientation of the difference image - reference on an
// axial slice: spectral energy of the difference is accumulated into 36
// orientation wedges over the radial band [min_radius, max_radius] (pixels;
// max_radius <= 0 means the Nyquist ring), and the argmax wedge is mapped
// back to the image domain (streaks run perpendicular to their spectral
// ridge).
StreakOrientation streak_orientation(const std::vector<float>& img,
                                     const std::vector<float>& reference,
                                     int width, int height, double min_radius,
                                     double max_radius = 0.0);

// Axial slice extraction helper (z index, row-major y/x).
std::vector<float> axial_slice(const Volume3D& vol, int iz);

// ---------- dense optical flow ----------

struct LKOptions {
  int levels = 3;          // pyramid levels
  int window = 9;          // odd box window edge for the normal equations
  int iterations = 2;      // warp refinements per level
  double cond_limit = 1e6; // structure-tensor condition bound; worse -> zero flow
};

struct FlowField3D {
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> dx, dy, dz;  // voxel displacements, (z,y,x) layout
  std::size_t index(int iz, int iy, int ix) const {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  }
};

// Dense pyramidal Lucas-Kanade from a to b (displacements in voxels, such
// that b(p + d(p)) ~ a(p)).
FlowField3D lucas_kanade_3d(const Volume3D& a, const Volume3D& b,
                            const LKOptions& opt = {});

// 2D variant on row-major images.
struct FlowField2D {
  int width = 0, height = 0;
  std::vector<float> dx, dy;
};
FlowField2D lucas_kanade_2d(const std::vector<float>& a,
                            const std::vector<float>& b, int width, int height,
                            const LKOptions& opt = {});

// ---------- trajectories ----------

struct Trajectory {
  Vec3 seed;                       // voxel coordinates (x, y, z)
  std::vector<Vec3> displacements; // one per flow step, voxel units
  bool truncated = false;          // left the volume before completing the loop
};

// Track seeds (every `stride`-th voxel of seed_mask) through a cyclic chain
// of flows (flow k maps phase k to k+1 mod N).
std::vector<Trajectory> track_trajectories(const std::vector<FlowField3D>& flows,
                                           const Mask& seed_mask, int nx, int ny,
                                           int nz, int stride);

struct AxisStats {
  double mean_abs_dx = 0.0;
  double mean_abs_dy = 0.0;
  double mean_abs_dz = 0.0;
  std::size_t steps = 0;  // displacement samples behind the means
};

// Mean absolute per-step displacement components over complete trajectories.
AxisStats axis_flow_stats(const std::vector<Trajectory>& trajectories);

// Flattened displacement sequences (dx0, dy0, dz0, dx1, ...) of the complete
// (non-truncated) trajectories, for export and clustering.
std::vector<std::vector<double>> trajectory_features(
    const std::vector<Trajectory>& trajectories);

// Lloyd 2-means with deterministic extremal initialization; returns one label
// (0/1) per feature row.
std::vector<int> kmeans2(const std::vector<std::vector<double>>& features,
                         int max_iterations = 64);

}  // namespace rstar
