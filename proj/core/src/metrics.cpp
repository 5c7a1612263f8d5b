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

#include "rstar/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rstar/scanner.hpp"

namespace rstar {

namespace {

std::vector<double> gaussian_taps(int window) {
  if (window < 3 || window % 2 == 0)
    throw DomainError("ssim: window must be odd and >= 3");
  const int r = window / 2;
  const double sigma = static_cast<double>(window) / 6.0;
  std::vector<double> taps(static_cast<std::size_t>(window));
  for (int i = -r; i <= r; ++i)
    taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  return taps;  // normalized on the fly (border renormalization)
}

// Separable weighted blur along one axis; border taps renormalized.
void blur_axis(const std::vector<double>& src, std::vector<double>& dst, int n0,
               int n1, int n2, int axis, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size()) / 2;
  const int dims[3] = {n0, n1, n2};
  const std::size_t strides[3] = {static_cast<std::size_t>(n1) * n2,
                                  static_cast<std::size_t>(n2), 1};
  const int na = dims[axis];
  const std::size_t sa = strides[axis];
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < dims[0]; ++i0) {
    for (int i1 = 0; i1 < dims[1]; ++i1)
      for (int i2 = 0; i2 < dims[2]; ++i2) {
        const int idx3[3] = {i0, i1, i2};
        const int ia = idx3[axis];
        const std::size_t base = i0 * strides[0] + i1 * strides[1] + i2 * strides[2];
        double acc = 0.0, wsum = 0.0;
        const int lo = std::max(-r, -ia);
        const int hi = std::min(r, na - 1 - ia);
        for (int k = lo; k <= hi; ++k) {
          const double w = taps[static_cast<std::size_t>(k + r)];
          acc += w * src[base + static_cast<std::size_t>(k) * sa];
          wsum += w;
        }
        dst[base] = acc / wsum;
      }
  }
}

std::vector<double> gaussian_blur3(const std::vector<double>& src, int nz, int ny,
                                   int nx, const std::vector<double>& taps) {
  std::vector<double> a(src), b(src.size());
  blur_axis(a, b, nz, ny, nx, 0, taps);
  blur_axis(b, a, nz, ny, nx, 1, taps);
  blur_axis(a, b, nz, ny, nx, 2, taps);
  return b;
}

void require_same_grid(const Volume3D& a, const Volume3D& b) {
  const GridSpec& ga = a.grid();
  const GridSpec& gb = b.grid();
  if (ga.nx != gb.nx || ga.ny != gb.ny || ga.nz != gb.nz)
    throw DomainError("metrics: volume dimensions differ");
  const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-3; };
  if (!close(ga.spacing.x, gb.spacing.x) || !close(ga.spacing.y, gb.spacing.y) ||
      !close(ga.spacing.z, gb.spacing.z))
    throw DomainError("metrics: volume spacings differ");
}

void require_mask(const Volume3D& a, const Mask& mask) {
  if (mask.size() != a.size()) throw DomainError("metrics: mask size mismatch");
  if (mask_count(mask) == 0) throw DomainError("metrics: empty mask");
}

}  // namespace

double ssim3d(const Volume3D& a, const Volume3D& b, const Mask& mask,
              const SsimOptions& opt) {
  require_same_grid(a, b);
  require_mask(a, mask);
  const int nz = a.nz(), ny = a.ny(), nx = a.nx();
  const std::size_t n = a.size();

  std::vector<double> va(n), vb(n), vaa(n), vbb(n), vab(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    va[i] = x;
    vb[i] = y;
    vaa[i] = x * x;
    vbb[i] = y * y;
    vab[i] = x * y;
  }
  const auto taps = gaussian_taps(opt.window);
  const auto mu_a = gaussian_blur3(va, nz, ny, nx, taps);
  const auto mu_b = gaussian_blur3(vb, nz, ny, nx, taps);
  const auto m_aa = gaussian_blur3(vaa, nz, ny, nx, taps);
  const auto m_bb = gaussian_blur3(vbb, nz, ny, nx, taps);
  const auto m_ab = gaussian_blur3(vab, nz, ny, nx, taps);

  const double c1 = (opt.k1 * opt.data_range) * (opt.k1 * opt.data_range);
  const double c2 = (opt.k2 * opt.data_range) * (opt.k2 * opt.data_range);

  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double ma = mu_a[i], mb = mu_b[i];
    const double sa = m_aa[i] - ma * ma;
    const double sb = m_bb[i] - mb * mb;
    const double sab = m_ab[i] - ma * mb;
    const double v = ((2.0 * ma * mb + c1) * (2.0 * sab + c2)) /
                     ((ma * ma + mb * mb + c1) * (sa + sb + c2));
    acc += v;
    ++cnt;
  }
  return acc / static_cast<double>(cnt);
}

double rmse(const Volume3D& a, const Volume3D& b, const Mask& mask) {
  require_same_grid(a, b);
  require_mask(a, mask);
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    acc += d * d;
    ++cnt;
  }
  return std::sqrt(acc / static_cast<double>(cnt));
}

double pearson_ncc(const Volume3D& a, const Volume3D& b, const Mask& mask) {
  require_same_grid(a, b);
  require_mask(a, mask);
  double sa = 0.0, sb = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    sa += a.data()[i];
    sb += b.data()[i];
    ++cnt;
  }
  const double ma = sa / static_cast<double>(cnt);
  const double mb = sb / static_cast<double>(cnt);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    const double xa = a.data()[i] - ma;
    const double xb = b.data()[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  if (da <= 0.0 || db <= 0.0)
    throw DomainError("pearson_ncc: constant input over mask");
  return num / std::sqrt(da * db);
}

Mask mask_all(const GridSpec& grid) { return Mask(grid.voxel_count(), 1); }

std::size_t mask_count(const Mask& mask) {
  std::size_t n = 0;
  for (std::uint8_t v : mask) n += v != 0;
  return n;
}

namespace {

// 6-connected flood labelling; returns component id per set voxel (-1 else)
// and per-component sizes.
std::vector<std::size_t> component_sizes(const Mask& mask, int nz, int ny, int nx,
                                         std::vector<std::int32_t>& labels) {
  labels.assign(mask.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  const std::size_t sy = static_cast<std::size_t>(nx);
  const std::size_t sz = static_cast<std::size_t>(nx) * ny;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || labels[seed] >= 0) continue;
    const std::int32_t id = static_cast<std::int32_t>(sizes.size());
    std::size_t count = 0;
    stack.push_back(seed);
    labels[seed] = id;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++count;
      const int ix = static_cast<int>(cur % sy);
      const int iy = static_cast<int>((cur / sy) % ny);
      const int iz = static_cast<int>(cur / sz);
      const int neigh[6][3] = {{ix - 1, iy, iz}, {ix + 1, iy, iz}, {ix, iy - 1, iz},
                               {ix, iy + 1, iz}, {ix, iy, iz - 1}, {ix, iy, iz + 1}};
      for (const auto& nb : neigh) {
        if (nb[0] < 0 || nb[0] >= nx || nb[1] < 0 || nb[1] >= ny || nb[2] < 0 ||
            nb[2] >= nz)
          continue;
        const std::size_t j = static_cast<std::size_t>(nb[2]) * sz +
                              static_cast<std::size_t>(nb[1]) * sy +
                              static_cast<std::size_t>(nb[0]);
        if (mask[j] && labels[j] < 0) {
          labels[j] = id;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(count);
  }
  return sizes;
}

Mask keep_largest(const Mask& mask, int nz, int ny, int nx, std::size_t how_many) {
  std::vector<std::int32_t> labels;
  const auto sizes = component_sizes(mask, nz, ny, nx, labels);
  if (sizes.empty()) return Mask(mask.size(), 0);
  std::vector<std::int32_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (sizes[static_cast<std::size_t>(a)] != sizes[static_cast<std::size_t>(b)])
      return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
    return a < b;  // deterministic tie-break
  });
  std::vector<std::uint8_t> keep(sizes.size(), 0);
  for (std::size_t i = 0; i < std::min(how_many, order.size()); ++i)
    keep[static_cast<std::size_t>(order[i])] = 1;
  Mask out(mask.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && keep[static_cast<std::size_t>(labels[i])]) out[i] = 1;
  return out;
}

// Fill cavities: everything not reachable from the volume border through the
// complement belongs to the mask.
Mask fill_holes(const Mask& mask, int nz, int ny, int nx) {
  Mask outside(mask.size(), 0);
  std::vector<std::size_t> stack;
  const std::size_t sy = static_cast<std::size_t>(nx);
  const std::size_t sz = static_cast<std::size_t>(nx) * ny;
  auto push = [&](int iz, int iy, int ix) {
    const std::size_t j = static_cast<std::size_t>(iz) * sz +
                          static_cast<std::size_t>(iy) * sy +
                          static_cast<std::size_t>(ix);
    if (!mask[j] && !outside[j]) {
      outside[j] = 1;
      stack.push_back(j);
    }
  };
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        if (iz == 0 || iz == nz - 1 || iy == 0 || iy == ny - 1 || ix == 0 ||
            ix == nx - 1)
          push(iz, iy, ix);
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    const int ix = static_cast<int>(cur % sy);
    const int iy = static_cast<int>((cur / sy) % ny);
    const int iz = static_cast<int>(cur / sz);
    if (ix > 0) push(iz, iy, ix - 1);
    if (ix + 1 < nx) push(iz, iy, ix + 1);
    if (iy > 0) push(iz, iy - 1, ix);
    if (iy + 1 < ny) push(iz, iy + 1, ix);
    if (iz > 0) push(iz - 1, iy, ix);
    if (iz + 1 < nz) push(iz + 1, iy, ix);
  }
  Mask out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] || !outside[i];
  return out;
}

std::vector<std::array<int, 3>> ball_offsets(int radius) {
  std::vector<std::array<int, 3>> offs;
  for (int dz = -radius; dz <= radius; ++dz)
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dx * dx + dy * dy + dz * dz <= radius * radius)
          offs.push_back({dz, dy, dx});
  return offs;
}

Mask dilate(const Mask& mask, int nz, int ny, int nx,
            const std::vector<std::array<int, 3>>& offs) {
  Mask out(mask.size(), 0);
  const std::size_t sy = static_cast<std::size_t>(nx);
  const std::size_t sz = static_cast<std::size_t>(nx) * ny;
#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        bool hit = false;
        for (const auto& o : offs) {
          const int z = iz + o[0], y = iy + o[1], x = ix + o[2];
          if (z < 0 || z >= nz || y < 0 || y >= ny || x < 0 || x >= nx) continue;
          if (mask[static_cast<std::size_t>(z) * sz + static_cast<std::size_t>(y) * sy +
                   static_cast<std::size_t>(x)]) {
            hit = true;
            break;
          }
        }
        if (hit)
          out[static_cast<std::size_t>(iz) * sz + static_cast<std::size_t>(iy) * sy +
              static_cast<std::size_t>(ix)] = 1;
      }
  return out;
}

Mask erode(const Mask& mask, int nz, int ny, int nx,
           const std::vector<std::array<int, 3>>& offs) {
  Mask out(mask.size(), 0);
  const std::size_t sy = static_cast<std::size_t>(nx);
  const std::size_t sz = static_cast<std::size_t>(nx) * ny;
#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        bool all = true;
        for (const auto& o : offs) {
          const int z = iz + o[0], y = iy + o[1], x = ix + o[2];
          if (z < 0 || z >= nz || y < 0 || y >= ny || x < 0 || x >= nx) {
            all = false;  // treat out-of-volume as background
            break;
          }
          if (!mask[static_cast<std::size_t>(z) * sz + static_cast<std::size_t>(y) * sy +
                    static_cast<std::size_t>(x)]) {
            all = false;
            break;
          }
        }
        if (all)
          out[static_cast<std::size_t>(iz) * sz + static_cast<std::size_t>(iy) * sy +
              static_cast<std::size_t>(ix)] = 1;
      }
  return out;
}

}  // namespace

Mask body_mask(const Volume3D& hu) {
  const int nz = hu.nz(), ny = hu.ny(), nx = hu.nx();
  Mask cand(hu.size(), 0);
  for (std::size_t i = 0; i < hu.size(); ++i) cand[i] = hu.data()[i] > -300.0f;
  Mask largest = keep_largest(cand, nz, ny, nx, 1);
  return fill_holes(largest, nz, ny, nx);
}

Mask lung_mask(const Volume3D& hu) {
  const int nz = hu.nz(), ny = hu.ny(), nx = hu.nx();
  const Mask body = body_mask(hu);
  Mask cand(hu.size(), 0);
  for (std::size_t i = 0; i < hu.size(); ++i)
    cand[i] = body[i] && hu.data()[i] < -400.0f;
  const auto offs = ball_offsets(2);
  Mask closed = erode(dilate(cand, nz, ny, nx, offs), nz, ny, nx, offs);
  return keep_largest(closed, nz, ny, nx, 2);
}

Mask tumor_mask(const Phantom4D& phantom, const GridSpec& grid, double amplitude,
                double margin_mm) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0))
    throw DomainError("tumor_mask: amplitude must lie in [0, 1]");
  Mask out(grid.voxel_count(), 0);
  Volume3D probe(grid);  // for voxel_center only
  bool any_tumor = false;
  for (const Ellipsoid& e : phantom.parts()) {
    if (e.tissue != Tissue::Tumor) continue;
    any_tumor = true;
    Ellipsoid grown = e;
    grown.semi_axes.x += margin_mm;
    grown.semi_axes.y += margin_mm;
    grown.semi_axes.z += margin_mm;
    for (int iz = 0; iz < grid.nz; ++iz)
      for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
          if (grown.contains(probe.voxel_center(iz, iy, ix), amplitude))
            out[(static_cast<std::size_t>(iz) * grid.ny + iy) * grid.nx + ix] = 1;
  }
  if (!any_tumor) throw DomainError("tumor_mask: phantom has no tumour part");
  return out;
}

double ssim2d(const float* a, const float* b, int width, int height,
              double data_range, int window) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> va(n), vb(n), vaa(n), vbb(n), vab(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a[i];
    vb[i] = b[i];
    vaa[i] = va[i] * va[i];
    vbb[i] = vb[i] * vb[i];
    vab[i] = va[i] * vb[i];
  }
  const auto taps = gaussian_taps(window);
  // Reuse the 3D machinery with a single slice.
  const auto mu_a = gaussian_blur3(va, 1, height, width, taps);
  const auto mu_b = gaussian_blur3(vb, 1, height, width, taps);
  const auto m_aa = gaussian_blur3(vaa, 1, height, width, taps);
  const auto m_bb = gaussian_blur3(vbb, 1, height, width, taps);
  const auto m_ab = gaussian_blur3(vab, 1, height, width, taps);
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double sa = m_aa[i] - ma * ma;
    const double sb = m_bb[i] - mb * mb;
    const double sab = m_ab[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * sab + c2)) /
           ((ma * ma + mb * mb + c1) * (sa + sb + c2));
  }
  return acc / static_cast<double>(n);
}

double pearson2d(const float* a, const float* b, std::size_t n) {
  if (n == 0) throw DomainError("pearson2d: empty");
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / static_cast<double>(n);
  const double mb = sb / static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xa = a[i] - ma;
    const double xb = b[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  if (da <= 0.0 || db <= 0.0) throw DomainError("pearson2d: constant image");
  return num / std::sqrt(da * db);
}

std::vector<ViewScore> projection_domain_eval(const Volume4D& recovered_hu,
                                              const ProjectionSet& measured) {
  const ScanGeometry& g = measured.geometry();
  const int n_phases = recovered_hu.phase_count();
  if (n_phases == 0) throw DomainError("projection_domain_eval: empty 4D volume");

  // One attenuation volume per phase, reprojected per view below.
  std::vector<Volume3D> mu;
  mu.reserve(static_cast<std::size_t>(n_phases));
  for (int p = 0; p < n_phases; ++p)
    mu.push_back(volume_hu_to_mu(recovered_hu.phase(p)));

  float gmin = measured.data().empty() ? 0.0f : measured.data()[0];
  float gmax = gmin;
  for (float v : measured.data()) {
    gmin = std::min(gmin, v);
    gmax = std::max(gmax, v);
  }
  const double range = std::max(1e-6, static_cast<double>(gmax) - gmin);

  std::vector<ViewScore> scores(measured.view_count());
  std::vector<float> reproj(measured.view_stride());
  for (std::size_t j = 0; j < measured.view_count(); ++j) {
    const ViewInfo& view = measured.view(j);
    if (view.phase < 0 || view.phase >= n_phases)
      throw DomainError("projection_domain_eval: view without a valid phase label");
    forward_project_view(mu[static_cast<std::size_t>(view.phase)], g, view.angle,
                         reproj.data());
    const float* meas = measured.view_data(j);
    scores[j].ssim = ssim2d(reproj.data(), meas, static_cast<int>(g.nu),
                            static_cast<int>(g.nv), range);
    scores[j].ncc = pearson2d(reproj.data(), meas, reproj.size());
  }
  return scores;
}

}  // namespace rstar
