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

#include "rstar/phantom.hpp"
#include "rstar/respiration.hpp"
#include "rstar/scan_geometry.hpp"
#include "rstar/volume.hpp"

namespace rstar {

// Source position and detector frame at gantry angle b.  The source orbits in
// the z = 0 plane; u points along the rotation direction and v along +z.
struct ViewFrame {
  Vec3 source;
  Vec3 det_center;  // centre of the (unshifted) detector plane
  Vec3 u_dir;
  Vec3 v_dir;
};

ViewFrame view_frame(const ScanGeometry& g, double angle);

// World position of detector channel (iu, iv) at gantry angle `angle`
// (fractional indices allowed; offset_u is included).
Vec3 detector_point(const ScanGeometry& g, double angle, double iu, double iv);

// Evenly spaced single-turn schedule: view j at time j*rotation_time/views
// and angle start_angle + direction*2*pi*j/views.  Phases start unassigned.
std::vector<ViewInfo> view_schedule(const ScanGeometry& g);

// Exact radiological path length: sum over traversed voxels of
// value * intersection length (mm), evaluated with Siddon's parametric walk.
double integrate_ray(const Volume3D& vol, const Vec3& src, const Vec3& dst);

// One cone-beam view of a static mu volume (mm^-1); out holds nu*nv samples,
// u fastest.
void forward_project_view(const Volume3D& mu, const ScanGeometry& g,
                          double angle, float* out);

// Full static single-turn scan.
ProjectionSet forward_project(const Volume3D& mu, const ScanGeometry& g);

// Breathing scan.  Views are phase-sorted against the signal (n_phases time
// bins per cycle, phase 0 at end-inhale) and the labels stored with each
// view.  In Continuous mode every view is projected through the phantom at
// the amplitude of its acquisition time; in PhaseLocked mode all views of a
// phase share that phase's mean amplitude, so each phase is one frozen
// anatomy and a phase reconstruction has an exactly re-projectable ground
// truth.  Voxelizations are cached per distinct amplitude.
enum class MotionSampling { Continuous, PhaseLocked };

ProjectionSet simulate_4d_scan(const Phantom4D& phantom,
                               const BreathingSignal& signal,
                               const ScanGeometry& g, const GridSpec& grid,
                               int n_phases,
                               MotionSampling sampling = MotionSampling::PhaseLocked);

// HU volume -> attenuation volume (mm^-1) and back.
Volume3D volume_hu_to_mu(const Volume3D& hu);
Volume3D volume_mu_to_hu(const Volume3D& mu);

}  // namespace rstar
