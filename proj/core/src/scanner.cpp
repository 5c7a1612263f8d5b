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

#include "rstar/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rstar {

ViewFrame view_frame(const ScanGeometry& g, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  ViewFrame f;
  f.source = {g.sad * c, g.sad * s, 0.0};
  f.det_center = {-(g.sdd - g.sad) * c, -(g.sdd - g.sad) * s, 0.0};
  // u completes a right-handed frame with the ray direction and +z.
  f.u_dir = {-s * static_cast<double>(g.direction), c * static_cast<double>(g.direction), 0.0};
  f.v_dir = {0.0, 0.0, 1.0};
  return f;
}

Vec3 detector_point(const ScanGeometry& g, double angle, double iu, double iv) {
  const ViewFrame f = view_frame(g, angle);
  return f.det_center + g.u_at(iu) * f.u_dir + g.v_at(iv) * f.v_dir;
}

std::vector<ViewInfo> view_schedule(const ScanGeometry& g) {
  g.validate();
  std::vector<ViewInfo> views(g.views_per_turn);
  for (std::uint32_t j = 0; j < g.views_per_turn; ++j) {
    ViewInfo& v = views[j];
    v.time = g.rotation_time * static_cast<double>(j) / g.views_per_turn;
    v.angle = g.start_angle +
              g.direction * 2.0 * kPi * static_cast<double>(j) / g.views_per_turn;
    v.phase = -1;
  }
  return views;
}

double integrate_ray(const Volume3D& vol, const Vec3& src, const Vec3& dst) {
  const GridSpec& g = vol.grid();
  const double s[3] = {src.x, src.y, src.z};
  const double d[3] = {dst.x - src.x, dst.y - src.y, dst.z - src.z};
  const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (len <= 0.0) return 0.0;

  const double sp[3] = {g.spacing.x, g.spacing.y, g.spacing.z};
  const double lo[3] = {g.origin.x - 0.5 * sp[0], g.origin.y - 0.5 * sp[1],
                        g.origin.z - 0.5 * sp[2]};
  const int n[3] = {g.nx, g.ny, g.nz};

  // Clip the parametric range [0, 1] against the grid slab per axis.
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double hi = lo[i] + n[i] * sp[i];
    if (std::abs(d[i]) < 1e-12) {
      if (s[i] < lo[i] || s[i] >= hi) return 0.0;
      continue;
    }
    double ta = (lo[i] - s[i]) / d[i];
    double tb = (hi - s[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 <= t0) return 0.0;

  // Entry voxel and per-axis crossing bookkeeping (Siddon's walk).
  int idx[3], step[3];
  double tnext[3], dt[3];
  for (int i = 0; i < 3; ++i) {
    const double entry = s[i] + t0 * d[i];
    int ii = static_cast<int>(std::floor((entry - lo[i]) / sp[i]));
    idx[i] = std::clamp(ii, 0, n[i] - 1);
    if (d[i] > 1e-12) {
      step[i] = 1;
      tnext[i] = (lo[i] + (idx[i] + 1) * sp[i] - s[i]) / d[i];
      dt[i] = sp[i] / d[i];
    } else if (d[i] < -1e-12) {
      step[i] = -1;
      tnext[i] = (lo[i] + idx[i] * sp[i] - s[i]) / d[i];
      dt[i] = -sp[i] / d[i];
    } else {
      step[i] = 0;
      tnext[i] = std::numeric_limits<double>::infinity();
      dt[i] = std::numeric_limits<double>::infinity();
    }
  }

  const auto stride_y = static_cast<std::size_t>(g.nx);
  const auto stride_z = static_cast<std::size_t>(g.nx) * g.ny;
  const float* data = vol.data().data();

  double acc = 0.0;
  double tcur = t0;
  constexpr double kEps = 1e-12;
  while (tcur < t1 - kEps) {
    const double texit = std::min(std::min(tnext[0], std::min(tnext[1], tnext[2])), t1);
    if (texit > tcur) {
      acc += static_cast<double>(
                 data[static_cast<std::size_t>(idx[2]) * stride_z +
                      static_cast<std::size_t>(idx[1]) * stride_y +
                      static_cast<std::size_t>(idx[0])]) *
             (texit - tcur);
      tcur = texit;
    }
    if (tcur >= t1 - kEps) break;
    bool advanced = false;
    for (int i = 0; i < 3; ++i) {
      if (tnext[i] <= tcur + kEps) {
        idx[i] += step[i];
        tnext[i] += dt[i];
        if (idx[i] < 0 || idx[i] >= n[i]) return acc * len;
        advanced = true;
      }
    }
    if (!advanced) break;  // numerical stall; the remaining sliver is < kEps
  }
  return acc * len;
}

void forward_project_view(const Volume3D& mu, const ScanGeometry& g,
                          double angle, float* out) {
  const ViewFrame f = view_frame(g, angle);
#pragma omp parallel for schedule(static)
  for (int iv = 0; iv < static_cast<int>(g.nv); ++iv) {
    const Vec3 row_base = f.det_center + g.v_at(iv) * f.v_dir;
    float* row = out + static_cast<std::size_t>(iv) * g.nu;
    for (std::uint32_t iu = 0; iu < g.nu; ++iu) {
      const Vec3 dst = row_base + g.u_at(iu) * f.u_dir;
      row[iu] = static_cast<float>(integrate_ray(mu, f.source, dst));
    }
  }
}

ProjectionSet forward_project(const Volume3D& mu, const ScanGeometry& g) {
  const auto schedule = view_schedule(g);
  ProjectionSet proj(g, schedule.size());
  proj.views() = schedule;
  for (std::size_t j = 0; j < schedule.size(); ++j)
    forward_project_view(mu, g, schedule[j].angle, proj.view_data(j));
  return proj;
}

ProjectionSet simulate_4d_scan(const Phantom4D& phantom,
                               const BreathingSignal& signal,
                               const ScanGeometry& g, const GridSpec& grid,
                               int n_phases, MotionSampling sampling) {
  if (n_phases <= 0) throw DomainError("simulate_4d_scan: n_phases <= 0");
  const auto schedule = view_schedule(g);
  std::vector<double> times(schedule.size());
  for (std::size_t j = 0; j < schedule.size(); ++j) times[j] = schedule[j].time;
  const std::vector<int> phases = phase_sort(times, signal, n_phases);

  ProjectionSet proj(g, schedule.size());
  proj.views() = schedule;

  // Distinct amplitudes repeat (cycle over cycle, or per phase); voxelize
  // each one once.
  std::map<long long, Volume3D> cache;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    proj.view(j).phase = phases[j];
    const double a = sampling == MotionSampling::PhaseLocked
                         ? phase_mean_amplitude(phases[j], n_phases)
                         : signal.amplitude_at(schedule[j].time);
    const long long key = std::llround(a * 1e12);
    auto it = cache.find(key);
    if (it == cache.end()) {
      if (cache.size() >= 64) cache.erase(cache.begin());
      it = cache.emplace(key, volume_hu_to_mu(phantom.sample_volume(grid, a)))
               .first;
    }
    forward_project_view(it->second, g, schedule[j].angle, proj.view_data(j));
  }
  return proj;
}

Volume3D volume_hu_to_mu(const Volume3D& hu) {
  Volume3D mu(hu.grid());
  const std::vector<float>& src = hu.data();
  std::vector<float>& dst = mu.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double m = hu_to_mu(src[i]);
    dst[i] = static_cast<float>(m > 0.0 ? m : 0.0);
  }
  return mu;
}

Volume3D volume_mu_to_hu(const Volume3D& mu) {
  Volume3D hu(mu.grid());
  const std::vector<float>& src = mu.data();
  std::vector<float>& dst = hu.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = static_cast<float>(mu_to_hu(src[i]));
  return hu;
}

}  // namespace rstar
