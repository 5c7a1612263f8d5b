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

#include <vector>

#include "rstar/scan_geometry.hpp"
#include "rstar/volume.hpp"

namespace rstar {

// Feldkamp reconstruction for circular cone-beam scans, with displaced-
// detector (half-fan) support.  Views are preweighted and ramp-filtered once;
// backprojection accumulates (sad/U)^2-weighted bilinear samples.  All
// detector coordinates used by the filter are rescaled to the isocenter plane
// (factor sad/sdd), which makes the classic flat-panel formulas exact.
//
// Displaced detectors are handled by conjugate completion: before filtering,
// each view is extended to a detector covering the whole fan and the missing
// channels are borrowed from the views half a turn (plus fan angle) away,
// where the same lines were measured at the mirrored detector position.  The
// filtered set therefore always behaves like a centred full-fan scan.  The
// alternative, weighting the measured overlap with halffan_weight() before
// the ramp, is kept as an exported primitive but is not used by fdk():
// because the ramp is nonlocal, the weight discontinuity leaves a bias in
// the singly covered annulus that completion avoids.

// Cone/fan-angle cosine weight for a physical detector position (u includes
// the lateral offset).
double cosine_weight(const ScanGeometry& g, double u, double v);

// Displaced-detector redundancy weight at physical detector coordinate u.
// With no offset every ray pair is measured twice and the weight is 1 (the
// double counting is folded into the angular weight instead).  With an
// offset, conjugate rays exist only in the overlap band |u| <= W/2 - |off|,
// where a sin^2 ramp splits unity between the two measurements.
double halffan_weight(const ScanGeometry& g, double u);

// Reconstruction kernel.  RamLak is the exact band-limited ramp and keeps
// streaks sharp; SheppLogan rolls off high frequencies for a smoother image.
enum class RampFilter { RamLak, SheppLogan };

// Ramp convolution of one detector row sampled at pitch du.  Ram-Lak:
// h(0) = 1/(4 du^2), h(odd n) = -1/(pi n du)^2, h(even n != 0) = 0.
// Shepp-Logan: h(n) = -2 / (pi^2 du^2 (4 n^2 - 1)).
// The result includes the du quadrature factor of the convolution integral.
std::vector<double> ramp_convolve(const std::vector<double>& row, double du,
                                  RampFilter filter = RampFilter::RamLak);

// Preweight + ramp-filter every view (cosine weight, ramp along u rows).
// A displaced detector is first completed to full-fan coverage from
// conjugate views, so the returned set may carry a wider detector geometry
// than the input (same pitch, same view metadata).  Completion needs the
// scan to cover a full turn; at least two views are required.
ProjectionSet fdk_filter_views(const ProjectionSet& proj,
                               RampFilter filter = RampFilter::RamLak);

// Backproject filtered views listed in `view_ids`, each scaled by its entry
// in `weights` (angular weight, rad).  Output is in the units of the
// projected volume (mu, mm^-1, when the projections are line integrals of mu).
Volume3D fdk_backproject(const ProjectionSet& filtered, const GridSpec& grid,
                         const std::vector<std::size_t>& view_ids,
                         const std::vector<double>& weights);

// Full-scan FDK: every view with angular weight pi/views_per_turn; the
// filtered views cover the whole fan (after completion if need be), so a
// full turn measures every ray twice.
Volume3D fdk(const ProjectionSet& proj, const GridSpec& grid,
             RampFilter filter = RampFilter::RamLak);

// Phase-gated FDK: views grouped by their phase label; phase i is
// reconstructed from its own views with angular weight pi/count_i, so a
// uniformly sampled phase reconstructs at full amplitude.  Every view must
// carry a label in [0, n_phases), and no phase may be empty.  The whole set
// is filtered once (with completion for displaced detectors), so the mean
// over equally populated phases matches the ungated reconstruction exactly.
Volume4D gated_fdk(const ProjectionSet& proj, const GridSpec& grid, int n_phases,
                   RampFilter filter = RampFilter::RamLak);

}  // namespace rstar
