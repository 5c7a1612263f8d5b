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

#include "rstar/phantom.hpp"

#include <cmath>

#include "rstar/rng.hpp"

namespace rstar {

bool Ellipsoid::contains(const Vec3& p, double a) const {
  const Vec3 c = center_at(a);
  const Vec3 s = semi_axes_at(a);
  Vec3 q = p - c;
  if (rotation.x != 0.0 || rotation.y != 0.0 || rotation.z != 0.0) {
    const Mat3 r = Mat3::euler_zyx(rotation.x, rotation.y, rotation.z);
    q = r.apply_transposed(q);
  }
  const double nx = q.x / s.x;
  const double ny = q.y / s.y;
  const double nz = q.z / s.z;
  return nx * nx + ny * ny + nz * nz <= 1.0;
}

const Ellipsoid* Phantom4D::find(const std::string& name) const {
  for (const Ellipsoid& e : parts_)
    if (e.name == name) return &e;
  return nullptr;
}

float Phantom4D::value_at(const Vec3& p, double a) const {
  // Painter's order: the last part containing p wins.
  for (auto it = parts_.rbegin(); it != parts_.rend(); ++it)
    if (it->contains(p, a)) return it->value_hu;
  return kAirHu;
}

namespace {

// Unit directions roughly uniform over the sphere, for surface checks.
std::vector<Vec3> sphere_directions(int n_az, int n_el) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(n_az) * n_el + 2);
  for (int ie = 1; ie < n_el; ++ie) {
    const double el = kPi * ie / n_el - 0.5 * kPi;
    for (int ia = 0; ia < n_az; ++ia) {
      const double az = 2.0 * kPi * ia / n_az;
      dirs.push_back({std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                      std::sin(el)});
    }
  }
  dirs.push_back({0.0, 0.0, 1.0});
  dirs.push_back({0.0, 0.0, -1.0});
  return dirs;
}

Vec3 surface_point(const Ellipsoid& e, const Vec3& dir, double a) {
  const Vec3 s = e.semi_axes_at(a);
  Vec3 local{dir.x * s.x, dir.y * s.y, dir.z * s.z};
  if (e.rotation.x != 0.0 || e.rotation.y != 0.0 || e.rotation.z != 0.0) {
    const Mat3 r = Mat3::euler_zyx(e.rotation.x, e.rotation.y, e.rotation.z);
    local = r.apply(local);
  }
  return e.center_at(a) + local;
}

double ellipsoid_norm(const Ellipsoid& e, const Vec3& p, double a) {
  const Vec3 s = e.semi_axes_at(a);
  Vec3 q = p - e.center_at(a);
  if (e.rotation.x != 0.0 || e.rotation.y != 0.0 || e.rotation.z != 0.0) {
    const Mat3 r = Mat3::euler_zyx(e.rotation.x, e.rotation.y, e.rotation.z);
    q = r.apply_transposed(q);
  }
  const double nx = q.x / s.x, ny = q.y / s.y, nz = q.z / s.z;
  return nx * nx + ny * ny + nz * nz;
}

// Containment is only meaningful inside the imaging field; long quasi-
// cylindrical parts (body, spine, lungs) run out of it on purpose.
constexpr double kZWindow = 90.0;

}  // namespace

void Phantom4D::validate() const {
  if (parts_.empty()) throw DomainError("phantom: no parts");
  const Ellipsoid* body = nullptr;
  for (const Ellipsoid& e : parts_) {
    if (!(e.semi_axes.x > 0.0 && e.semi_axes.y > 0.0 && e.semi_axes.z > 0.0))
      throw DomainError("phantom part '" + e.name + "': non-positive semi-axis");
    for (double ang : {e.rotation.x, e.rotation.y, e.rotation.z})
      if (!(std::abs(ang) <= kPi))
        throw DomainError("phantom part '" + e.name + "': rotation outside [-pi, pi]");
    if (e.value_hu < -1000.0f || e.value_hu > 500.0f)
      throw DomainError("phantom part '" + e.name + "': HU outside [-1000, 500]");
    for (double s : {e.axis_scale.x, e.axis_scale.y, e.axis_scale.z})
      if (s <= -1.0)
        throw DomainError("phantom part '" + e.name + "': axis scale collapses the part");
    if (e.tissue == Tissue::Body && body == nullptr) body = &e;
  }
  if (body == nullptr) throw DomainError("phantom: no body outline part");

  const auto dirs = sphere_directions(24, 12);
  const double amps[] = {0.0, 0.25, 0.5, 0.75, 1.0};

  for (const Ellipsoid& e : parts_) {
    if (&e == body || e.tissue == Tissue::Body) continue;
    for (double a : amps)
      for (const Vec3& d : dirs) {
        const Vec3 p = surface_point(e, d, a);
        if (std::abs(p.z) > kZWindow) continue;
        if (ellipsoid_norm(*body, p, a) > 1.0 + 1e-9)
          throw DomainError("phantom part '" + e.name +
                            "' leaves the body outline during breathing");
      }
  }

  // Each tumour must stay strictly inside some lung over the whole cycle.
  for (const Ellipsoid& t : parts_) {
    if (t.tissue != Tissue::Tumor) continue;
    for (double a : amps) {
      bool inside_some_lung = false;
      for (const Ellipsoid& l : parts_) {
        if (l.tissue != Tissue::Lung) continue;
        bool all_in = true;
        for (const Vec3& d : dirs)
          if (ellipsoid_norm(l, surface_point(t, d, a), a) > 1.0) {
            all_in = false;
            break;
          }
        if (all_in) {
          inside_some_lung = true;
          break;
        }
      }
      if (!inside_some_lung)
        throw DomainError("phantom tumour '" + t.name +
                          "' is not contained in a lung over the breathing cycle");
    }
  }
}

Volume3D Phantom4D::sample_volume(const GridSpec& grid, double amplitude) const {
  if (!(amplitude >= 0.0 && amplitude <= 1.0))
    throw DomainError("sample_volume: amplitude must lie in [0, 1]");
  Volume3D vol(grid);
#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix)
        vol.at(iz, iy, ix) = value_at(vol.voxel_center(iz, iy, ix), amplitude);
  }
  return vol;
}

Volume4D Phantom4D::sample_phases(const GridSpec& grid,
                                  const std::vector<double>& amplitudes) const {
  if (amplitudes.empty()) throw DomainError("sample_phases: no amplitudes");
  Volume4D out;
  for (double a : amplitudes) out.push_back(sample_volume(grid, a));
  return out;
}

Phantom4D thorax_v1() {
  std::vector<Ellipsoid> parts;
  parts.push_back({"torso", Tissue::Body, {0, 0, 0}, {110, 85, 400}, {0, 0, 0},
                   0.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"spine", Tissue::Bone, {0, -62, 0}, {11, 11, 400}, {0, 0, 0},
                   400.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"lung_l", Tissue::Lung, {-48, 5, 2.5}, {38, 52, 72.5},
                   {0, 0, 0}, -800.0f, {0, 0, -6}, {0.02, 0.02, 0.04}});
  parts.push_back({"lung_r", Tissue::Lung, {48, 5, 2.5}, {38, 52, 72.5},
                   {0, 0, 0}, -800.0f, {0, 0, -6}, {0.02, 0.02, 0.04}});
  parts.push_back({"rib_r1", Tissue::Bone, {85, 28, 15}, {6, 18, 7}, {0.5, 0, 0.3},
                   400.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"rib_l1", Tissue::Bone, {-85, 28, 15}, {6, 18, 7}, {-0.5, 0, -0.3},
                   400.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"rib_r2", Tissue::Bone, {82, -30, -5}, {6, 16, 7}, {0.5, 0, -0.25},
                   400.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"rib_l2", Tissue::Bone, {-82, -30, -5}, {6, 16, 7}, {-0.5, 0, 0.25},
                   400.0f, {0, 0, 0}, {0, 0, 0}});
  parts.push_back({"diaphragm", Tissue::Diaphragm, {0, 0, -58}, {62, 55, 30},
                   {0, 0, 0}, 40.0f, {0, 0, -15}, {0, 0, 0}});
  parts.push_back({"tumor", Tissue::Tumor, {48, 8, 22}, {12, 12, 12}, {0, 0, 0},
                   30.0f, {0, 2, -10}, {0, 0, 0}});
  Phantom4D ph(std::move(parts));
  ph.validate();
  return ph;
}

Phantom4D thorax_variant(std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, "phantom-variant", attempt));
    std::vector<Ellipsoid> parts;

    const double body_sx = 110.0 * rng.uniform(0.92, 1.08);
    const double body_sy = 85.0 * rng.uniform(0.92, 1.08);
    parts.push_back({"torso", Tissue::Body, {0, 0, 0}, {body_sx, body_sy, 400},
                     {0, 0, 0}, static_cast<float>(rng.uniform(-20, 20)),
                     {0, 0, 0}, {0, 0, 0}});
    parts.push_back({"spine", Tissue::Bone,
                     {rng.uniform(-4, 4), -62.0 * body_sy / 85.0, 0},
                     {11 * rng.uniform(0.9, 1.1), 11 * rng.uniform(0.9, 1.1), 400},
                     {0, 0, 0}, 400.0f, {0, 0, 0}, {0, 0, 0}});

    const float lung_hu = static_cast<float>(rng.uniform(-850, -750));
    const double scale_xy = rng.uniform(0.01, 0.03);
    const double scale_z = rng.uniform(0.02, 0.04);
    Ellipsoid lung_l{"lung_l", Tissue::Lung,
                     {-48.0 * body_sx / 110.0 + rng.uniform(-3, 3),
                      5.0 + rng.uniform(-4, 4), 2.5 + rng.uniform(-4, 4)},
                     {38 * rng.uniform(0.92, 1.08) * body_sx / 110.0,
                      52 * rng.uniform(0.92, 1.08) * body_sy / 85.0,
                      72.5 * rng.uniform(0.92, 1.08)},
                     {0, 0, 0}, lung_hu,
                     {0, 0, -rng.uniform(0.5, 1.5)}, {scale_xy, scale_xy, scale_z}};
    Ellipsoid lung_r = lung_l;
    lung_r.name = "lung_r";
    lung_r.center.x = -lung_l.center.x + rng.uniform(-2, 2);
    lung_r.semi_axes.x *= rng.uniform(0.97, 1.03);
    parts.push_back(lung_l);
    parts.push_back(lung_r);

    auto add_rib = [&](const char* name, double cx, double cy, double cz,
                       double sy, double rz) {
      parts.push_back({name, Tissue::Bone,
                       {cx * body_sx / 110.0 + rng.uniform(-3, 3),
                        cy * body_sy / 85.0 + rng.uniform(-3, 3),
                        cz + rng.uniform(-3, 3)},
                       {6, sy, 7}, {0, 0, rz + rng.uniform(-0.1, 0.1)},
                       400.0f, {0, 0, 0}, {0, 0, 0}});
    };
    add_rib("rib_r1", 85, 28, 15, 18, 0.3);
    add_rib("rib_l1", -85, 28, 15, 18, -0.3);
    add_rib("rib_r2", 82, -30, -5, 16, -0.25);
    add_rib("rib_l2", -82, -30, -5, 16, 0.25);

    parts.push_back({"diaphragm", Tissue::Diaphragm,
                     {rng.uniform(-4, 4), rng.uniform(-4, 4), -58 + rng.uniform(-4, 4)},
                     {62 * rng.uniform(0.95, 1.05) * body_sx / 110.0,
                      55 * rng.uniform(0.95, 1.05) * body_sy / 85.0,
                      30 * rng.uniform(0.9, 1.1)},
                     {0, 0, 0}, static_cast<float>(rng.uniform(30, 50)),
                     {0, 0, -rng.uniform(12, 18)}, {0, 0, 0}});

    // Tumour inside the right lung at a bounded normalized radius.
    const Ellipsoid& host = parts[3];
    const double tr = rng.uniform(8, 14);
    const double az = rng.uniform(0, 2 * kPi);
    const double el = rng.uniform(-0.9, 0.9);
    const double rad = rng.uniform(0.0, 0.45);
    parts.push_back({"tumor", Tissue::Tumor,
                     {host.center.x + rad * host.semi_axes.x * std::cos(el) * std::cos(az),
                      host.center.y + rad * host.semi_axes.y * std::cos(el) * std::sin(az),
                      host.center.z + rad * host.semi_axes.z * std::sin(el)},
                     {tr, tr, tr}, {0, 0, 0},
                     static_cast<float>(rng.uniform(20, 60)),
                     {0, rng.uniform(1, 3), -rng.uniform(7, 13)}, {0, 0, 0}});

    Phantom4D ph(std::move(parts));
    try {
      ph.validate();
      return ph;
    } catch (const DomainError&) {
      // Geometric draw violated an invariant; take the next deterministic one.
    }
  }
  throw DomainError("thorax_variant: no valid geometry after 100 attempts");
}

}  // namespace rstar
