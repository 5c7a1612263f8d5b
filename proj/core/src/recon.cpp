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

#include "rstar/recon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

#include "rstar/fft.hpp"

namespace rstar {

double cosine_weight(const ScanGeometry& g, double u, double v) {
  const double scale = g.sad / g.sdd;
  const double ui = u * scale;
  const double vi = v * scale;
  return g.sad / std::sqrt(g.sad * g.sad + ui * ui + vi * vi);
}

double halffan_weight(const ScanGeometry& g, double u) {
  if (g.offset_u == 0.0) return 1.0;
  // Mirror so the math below always sees a positive offset.
  double off = g.offset_u;
  if (off < 0.0) {
    off = -off;
    u = -u;
  }
  const double a = 0.5 * g.det_width - off;  // physical half-width of overlap
  if (u >= a) return 1.0;
  if (u <= -a) return 0.0;
  const double s = std::sin(0.25 * kPi * (1.0 + u / a));
  return s * s;
}

namespace {

// Spatial ramp kernel in circular layout (support wraps around the buffer).
std::vector<std::complex<double>> ramp_kernel(std::size_t pad, double du,
                                              RampFilter filter) {
  std::vector<std::complex<double>> ker(pad, 0.0);
  if (filter == RampFilter::RamLak) {
    ker[0] = 1.0 / (4.0 * du * du);
    for (std::size_t k = 1; k < pad / 2; k += 2) {
      const double v = -1.0 / (kPi * kPi * static_cast<double>(k) *
                               static_cast<double>(k) * du * du);
      ker[k] = v;
      ker[pad - k] = v;
    }
  } else {
    for (std::size_t k = 0; k <= pad / 2; ++k) {
      const double kk = static_cast<double>(k);
      const double v = -2.0 / (kPi * kPi * du * du * (4.0 * kk * kk - 1.0));
      ker[k] = v;
      if (k > 0 && k < pad / 2) ker[pad - k] = v;
    }
  }
  return ker;
}

}  // namespace

std::vector<double> ramp_convolve(const std::vector<double>& row, double du,
                                  RampFilter filter) {
  if (row.empty()) throw DomainError("ramp_convolve: empty row");
  if (!(du > 0.0)) throw DomainError("ramp_convolve: du <= 0");
  const std::size_t n = row.size();
  const std::size_t pad = next_pow2(2 * n);

  auto ker = ramp_kernel(pad, du, filter);
  fft_inplace(ker, false);

  std::vector<std::complex<double>> buf(pad, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = row[i];
  fft_inplace(buf, false);
  for (std::size_t i = 0; i < pad; ++i) buf[i] *= ker[i];
  fft_inplace(buf, true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() * du;
  return out;
}

namespace {

// Cached ramp spectrum per (pad, du, filter); filtering touches thousands of
// rows with one or two distinct shapes.
const std::vector<std::complex<double>>& ramp_spectrum(std::size_t pad, double du,
                                                       RampFilter filter) {
  static std::map<std::tuple<std::size_t, long long, int>,
                  std::vector<std::complex<double>>> cache;
  const auto key = std::make_tuple(pad, std::llround(du * 1e9),
                                   static_cast<int>(filter));
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto ker = ramp_kernel(pad, du, filter);
    fft_inplace(ker, false);
    it = cache.emplace(key, std::move(ker)).first;
  }
  return it->second;
}

// Channels blended across the displaced-detector seam.  A handful of channels
// keeps the transition band narrow, which matters for gated reconstruction:
// away from the seam every measured channel stays pure own-view data.
constexpr int kSeamChannels = 8;

inline double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

// Linear sample of one detector row at fractional channel index fi, clamped
// to the physical channel range.
inline double row_sample(const float* row, std::uint32_t nu, double fi) {
  if (fi <= 0.0) return row[0];
  if (fi >= static_cast<double>(nu - 1)) return row[nu - 1];
  const int i0 = static_cast<int>(fi);
  const double a = fi - i0;
  return (1.0 - a) * row[i0] + a * row[i0 + 1];
}

// Extends each displaced-detector view to a detector that covers the whole
// fan.  The missing channels are borrowed from the conjugate rays: the line
// measured at (beta, u) is measured again at
//   (beta + pi - 2*direction*atan(u/sdd), -u),
// so the absent side of every view can be filled from views roughly half a
// turn away (linear interpolation in angle, channel-linear at the mirrored
// position, same detector row; the small cone-angle mismatch of conjugate
// rays is ignored).  The returned set behaves like a centred scan, which
// removes the lateral-truncation bias that per-channel overlap weighting
// leaves in the singly covered annulus.
ProjectionSet complete_halffan(const ProjectionSet& proj) {
  const ScanGeometry& g = proj.geometry();
  const std::size_t n_views = proj.view_count();
  if (n_views < 2)
    throw DomainError("complete_halffan: need at least two views");

  const double du = g.du();
  const double side = g.offset_u > 0.0 ? 1.0 : -1.0;
  const int m =
      static_cast<int>(std::ceil(2.0 * std::abs(g.offset_u) / du - 1e-9));

  ScanGeometry ext = g;
  ext.nu = g.nu + static_cast<std::uint32_t>(m);
  ext.det_width = g.det_width + m * du;
  ext.offset_u = g.offset_u - side * 0.5 * m * du;
  ext.validate();
  // Extended channel k holds measured channel k - shift; the grafted side
  // lines up exactly because the pitch is unchanged.
  const int shift = g.offset_u > 0.0 ? m : 0;

  // Wrapped view angles, sorted for donor lookup.  Multi-turn sets may carry
  // (near-)duplicate angles; the interpolation weight degenerates to zero arc
  // there, which is handled below.
  std::vector<std::pair<double, std::size_t>> order(n_views);
  for (std::size_t j = 0; j < n_views; ++j)
    order[j] = {wrap_2pi(proj.view(j).angle), j};
  std::sort(order.begin(), order.end());

  const std::size_t row_len = static_cast<std::size_t>(g.nu);
  ProjectionSet out(ext, n_views);
  out.views() = proj.views();

  // Per-channel quantities; none depend on the view.
  const double edge_short =
      g.offset_u > 0.0 ? g.u_at(0.0) - 0.5 * du : g.u_at(g.nu - 1.0) + 0.5 * du;
  std::vector<double> w_meas(ext.nu), fi_conj(ext.nu), delta(ext.nu);
  for (std::uint32_t k = 0; k < ext.nu; ++k) {
    const double u = ext.u_at(k);
    const int jm = static_cast<int>(k) - shift;
    const bool measured = jm >= 0 && jm < static_cast<int>(g.nu);
    fi_conj[k] = (-u - g.u_at(0.0)) / du;
    const bool conj_ok = fi_conj[k] > -1.0 && fi_conj[k] < static_cast<double>(g.nu);
    delta[k] = kPi - 2.0 * g.direction * std::atan(u / g.sdd);
    if (!measured) {
      w_meas[k] = 0.0;
    } else if (!conj_ok) {
      w_meas[k] = 1.0;
    } else {
      const double s = side * (u - edge_short) / (kSeamChannels * du);
      const double t = s <= 0.0 ? 0.0 : (s >= 1.0 ? 1.0 : s);
      const double sn = std::sin(0.5 * kPi * t);
      w_meas[k] = sn * sn;
    }
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < static_cast<int>(n_views); ++j) {
    const float* src = proj.view_data(static_cast<std::size_t>(j));
    float* dst = out.view_data(static_cast<std::size_t>(j));
    // Measured channels copy straight across.
    for (std::uint32_t iv = 0; iv < g.nv; ++iv) {
      const float* srow = src + static_cast<std::size_t>(iv) * row_len;
      float* drow = dst + static_cast<std::size_t>(iv) * ext.nu;
      for (std::uint32_t k = 0; k < ext.nu; ++k) {
        const int jm = static_cast<int>(k) - shift;
        drow[k] = (jm >= 0 && jm < static_cast<int>(g.nu)) ? srow[jm] : 0.0f;
      }
    }
    // Borrowed and seam channels blend in the conjugate estimate.
    for (std::uint32_t k = 0; k < ext.nu; ++k) {
      if (w_meas[k] >= 1.0) continue;
      const double target = wrap_2pi(proj.view(static_cast<std::size_t>(j)).angle + delta[k]);
      auto it = std::upper_bound(order.begin(), order.end(),
                                 std::make_pair(target, n_views));
      const auto& hi = it == order.end() ? order.front() : *it;
      const auto& lo = it == order.begin() ? order.back() : *(it - 1);
      double arc = hi.first - lo.first;
      if (arc <= 0.0) arc += 2.0 * kPi;
      double off = target - lo.first;
      if (off < 0.0) off += 2.0 * kPi;
      const double a = arc > 1e-12 ? off / arc : 0.0;
      const float* d0 = proj.view_data(lo.second);
      const float* d1 = proj.view_data(hi.second);
      for (std::uint32_t iv = 0; iv < g.nv; ++iv) {
        const std::size_t r = static_cast<std::size_t>(iv) * row_len;
        const double conj = (1.0 - a) * row_sample(d0 + r, g.nu, fi_conj[k]) +
                            a * row_sample(d1 + r, g.nu, fi_conj[k]);
        float* cell = dst + static_cast<std::size_t>(iv) * ext.nu + k;
        *cell = static_cast<float>(w_meas[k] * *cell + (1.0 - w_meas[k]) * conj);
      }
    }
  }
  return out;
}

}  // namespace

ProjectionSet fdk_filter_views(const ProjectionSet& proj, RampFilter filter) {
  proj.geometry().validate();
  // A displaced detector is first completed to full-fan coverage, after which
  // the filtered set carries the extended geometry and no per-channel overlap
  // weighting is needed.
  const bool displaced = proj.geometry().offset_u != 0.0;
  const ProjectionSet completed = displaced ? complete_halffan(proj) : ProjectionSet();
  const ProjectionSet& in = displaced ? completed : proj;
  const ScanGeometry& g = in.geometry();

  ProjectionSet out(g, in.view_count());
  out.views() = in.views();

  const double du_iso = g.du() * g.sad / g.sdd;
  const std::size_t pad = next_pow2(2 * static_cast<std::size_t>(g.nu));
  const auto& spectrum = ramp_spectrum(pad, du_iso, filter);

  std::vector<double> u_phys(g.nu);
  for (std::uint32_t iu = 0; iu < g.nu; ++iu) u_phys[iu] = g.u_at(iu);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < static_cast<int>(in.view_count()); ++j) {
    std::vector<std::complex<double>> buf(pad);
    for (std::uint32_t iv = 0; iv < g.nv; ++iv) {
      const double v = g.v_at(iv);
      const float* src = in.view_data(static_cast<std::size_t>(j)) +
                         static_cast<std::size_t>(iv) * g.nu;
      std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
      for (std::uint32_t iu = 0; iu < g.nu; ++iu)
        buf[iu] = static_cast<double>(src[iu]) * cosine_weight(g, u_phys[iu], v);
      fft_inplace(buf, false);
      for (std::size_t i = 0; i < pad; ++i) buf[i] *= spectrum[i];
      fft_inplace(buf, true);
      float* dst = out.view_data(static_cast<std::size_t>(j)) +
                   static_cast<std::size_t>(iv) * g.nu;
      for (std::uint32_t iu = 0; iu < g.nu; ++iu)
        dst[iu] = static_cast<float>(buf[iu].real() * du_iso);
    }
  }
  return out;
}

Volume3D fdk_backproject(const ProjectionSet& filtered, const GridSpec& grid,
                         const std::vector<std::size_t>& view_ids,
                         const std::vector<double>& weights) {
  if (view_ids.size() != weights.size())
    throw DomainError("fdk_backproject: ids/weights size mismatch");
  const ScanGeometry& g = filtered.geometry();
  std::vector<double> acc(grid.voxel_count(), 0.0);
  const std::size_t plane = static_cast<std::size_t>(grid.nx) * grid.ny;

  for (std::size_t k = 0; k < view_ids.size(); ++k) {
    const std::size_t id = view_ids[k];
    if (id >= filtered.view_count()) throw DomainError("fdk_backproject: view id out of range");
    const double beta = filtered.view(id).angle;
    const double w_view = weights[k];
    const double cb = std::cos(beta), sb = std::sin(beta);
    // u axis direction reflects the rotation sense (matches view_frame).
    const double ux = -sb * g.direction, uy = cb * g.direction;
    const float* view = filtered.view_data(id);

#pragma omp parallel for schedule(static)
    for (int iz = 0; iz < grid.nz; ++iz) {
      const double z = grid.origin.z + iz * grid.spacing.z;
      double* slab = acc.data() + static_cast<std::size_t>(iz) * plane;
      for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.origin.y + iy * grid.spacing.y;
        for (int ix = 0; ix < grid.nx; ++ix) {
          const double x = grid.origin.x + ix * grid.spacing.x;
          // Distance from the source plane and transverse coordinate.
          const double U = g.sad - (x * cb + y * sb);
          if (U <= 1e-6) continue;
          const double t = x * ux + y * uy;
          // Similar triangles: the detector sits at sdd, the voxel plane at U.
          const double u_phys = t * g.sdd / U;
          const double v_phys = z * g.sdd / U;
          const double fu = (u_phys + 0.5 * g.det_width - g.offset_u) / g.du() - 0.5;
          const double fv = (v_phys + 0.5 * g.det_height) / g.dv() - 0.5;
          if (fu <= -1.0 || fu >= static_cast<double>(g.nu) ||
              fv <= -1.0 || fv >= static_cast<double>(g.nv))
            continue;
          const int iu0 = static_cast<int>(std::floor(fu));
          const int iv0 = static_cast<int>(std::floor(fv));
          const double au = fu - iu0;
          const double av = fv - iv0;
          auto sample = [&](int iv, int iu) -> double {
            if (iu < 0 || iu >= static_cast<int>(g.nu) || iv < 0 ||
                iv >= static_cast<int>(g.nv))
              return 0.0;
            return view[static_cast<std::size_t>(iv) * g.nu + iu];
          };
          const double interp =
              (1.0 - av) * ((1.0 - au) * sample(iv0, iu0) + au * sample(iv0, iu0 + 1)) +
              av * ((1.0 - au) * sample(iv0 + 1, iu0) + au * sample(iv0 + 1, iu0 + 1));
          const double ratio = g.sad / U;
          slab[static_cast<std::size_t>(iy) * grid.nx + ix] +=
              w_view * ratio * ratio * interp;
        }
      }
    }
  }

  Volume3D out(grid);
  // The Ram-Lak kernel normalization (spectrum |f| up to Nyquist) makes the
  // weighted sum directly equal to mu; no trailing constant remains.
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.data()[i] = static_cast<float>(acc[i]);
  return out;
}

namespace {

double base_angular_weight(const ScanGeometry&) {
  // After filtering the views always cover the whole fan (a displaced
  // detector has been completed from conjugate rays), so a full turn counts
  // every ray twice.
  return 0.5;
}

}  // namespace

Volume3D fdk(const ProjectionSet& proj, const GridSpec& grid,
             RampFilter filter) {
  const ProjectionSet filtered = fdk_filter_views(proj, filter);
  std::vector<std::size_t> ids(proj.view_count());
  std::vector<double> weights(proj.view_count());
  const double w =
      base_angular_weight(proj.geometry()) * 2.0 * kPi / proj.geometry().views_per_turn;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = i;
    weights[i] = w;
  }
  return fdk_backproject(filtered, grid, ids, weights);
}

Volume4D gated_fdk(const ProjectionSet& proj, const GridSpec& grid, int n_phases,
                   RampFilter filter) {
  if (n_phases <= 0) throw DomainError("gated_fdk: n_phases <= 0");
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_phases));
  for (std::size_t i = 0; i < proj.view_count(); ++i) {
    const std::int32_t p = proj.view(i).phase;
    if (p < 0 || p >= n_phases)
      throw DomainError("gated_fdk: view without a valid phase label");
    groups[static_cast<std::size_t>(p)].push_back(i);
  }
  for (int p = 0; p < n_phases; ++p)
    if (groups[static_cast<std::size_t>(p)].empty())
      throw DomainError("gated_fdk: phase " + std::to_string(p) + " has no views");

  const ProjectionSet filtered = fdk_filter_views(proj, filter);
  const double base = base_angular_weight(proj.geometry());
  Volume4D out;
  for (int p = 0; p < n_phases; ++p) {
    const auto& ids = groups[static_cast<std::size_t>(p)];
    std::vector<double> weights(ids.size(), base * 2.0 * kPi / static_cast<double>(ids.size()));
    out.push_back(fdk_backproject(filtered, grid, ids, weights));
  }
  return out;
}

}  // namespace rstar
