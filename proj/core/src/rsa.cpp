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

#include "rstar/rsa.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "rstar/fft.hpp"

namespace rstar {

// ---------- angular sampling ----------

std::vector<PhaseSampling> sampling_patterns(const ProjectionSet& proj,
                                             int n_phases) {
  if (n_phases <= 0) throw DomainError("sampling_patterns: n_phases <= 0");
  std::vector<PhaseSampling> out(static_cast<std::size_t>(n_phases));
  for (std::size_t i = 0; i < proj.view_count(); ++i) {
    const std::int32_t p = proj.view(i).phase;
    if (p < 0 || p >= n_phases)
      throw DomainError("sampling_patterns: view without a valid phase label");
    double a = std::fmod(proj.view(i).angle, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    out[static_cast<std::size_t>(p)].angles.push_back(a);
  }
  for (int p = 0; p < n_phases; ++p) {
    PhaseSampling& ps = out[static_cast<std::size_t>(p)];
    if (ps.angles.empty())
      throw DomainError("sampling_patterns: phase " + std::to_string(p) +
                        " has no views");
    std::sort(ps.angles.begin(), ps.angles.end());
    const std::size_t n = ps.angles.size();
    std::vector<double> orientations, weights;
    for (std::size_t j = 0; j < n; ++j) {
      const double start = ps.angles[j];
      const double next = j + 1 < n ? ps.angles[j + 1] : ps.angles[0] + 2.0 * kPi;
      AngularGap gap{start, next - start};
      ps.gaps.push_back(gap);
      ps.max_gap = std::max(ps.max_gap, gap.extent);
      orientations.push_back(std::fmod(gap.center(), kPi));
      weights.push_back(gap.extent);
    }
    const OrientationMean om = circular_orientation_mean(orientations, weights);
    ps.gap_orientation = om.orientation;
    ps.gap_resultant = om.resultant;
  }
  return out;
}

int count_angle_clusters(const std::vector<double>& sorted_angles,
                         double gap_threshold) {
  if (sorted_angles.empty()) throw DomainError("count_angle_clusters: no angles");
  if (!(gap_threshold > 0.0)) throw DomainError("count_angle_clusters: bad threshold");
  const std::size_t n = sorted_angles.size();
  int breaks = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double next =
        j + 1 < n ? sorted_angles[j + 1] : sorted_angles[0] + 2.0 * kPi;
    if (next - sorted_angles[j] > gap_threshold) ++breaks;
  }
  return std::max(1, breaks);
}

// ---------- circular statistics ----------

OrientationMean circular_orientation_mean(const std::vector<double>& orientations,
                                          const std::vector<double>& weights) {
  if (orientations.empty() || orientations.size() != weights.size())
    throw DomainError("circular_orientation_mean: bad input sizes");
  double cr = 0.0, ci = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < orientations.size(); ++i) {
    cr += weights[i] * std::cos(2.0 * orientations[i]);
    ci += weights[i] * std::sin(2.0 * orientations[i]);
    wsum += weights[i];
  }
  if (!(wsum > 0.0)) throw DomainError("circular_orientation_mean: zero weight");
  cr /= wsum;
  ci /= wsum;
  OrientationMean om;
  om.resultant = std::sqrt(cr * cr + ci * ci);
  double half = 0.5 * std::atan2(ci, cr);
  if (half < 0.0) half += kPi;
  om.orientation = half;
  return om;
}

double circular_correlation(const std::vector<double>& a,
                            const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size())
    throw DomainError("circular_correlation: bad input sizes");
  double cr = 0.0, ci = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cr += std::cos(2.0 * (a[i] - b[i]));
    ci += std::sin(2.0 * (a[i] - b[i]));
  }
  cr /= static_cast<double>(a.size());
  ci /= static_cast<double>(a.size());
  return std::sqrt(cr * cr + ci * ci);
}

// ---------- streak orientation ----------

StreakOrientation streak_orientation(const std::vector<float>& img,
                                     const std::vector<float>& reference,
                                     int width, int height, double min_radius,
                                     double max_radius) {
  if (width < 8 || height < 8)
    throw DomainError("streak_orientation: image too small");
  if (img.size() != static_cast<std::size_t>(width) * height ||
      reference.size() != img.size())
    throw DomainError("streak_orientation: size mismatch");

  const int pw = static_cast<int>(next_pow2(static_cast<std::size_t>(width)));
  const int ph = static_cast<int>(next_pow2(static_cast<std::size_t>(height)));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(pw) * ph, 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i)
    mean += static_cast<double>(img[i]) - reference[i];
  mean /= static_cast<double>(img.size());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      spec[static_cast<std::size_t>(r) * pw + c] =
          static_cast<double>(img[static_cast<std::size_t>(r) * width + c]) -
          reference[static_cast<std::size_t>(r) * width + c] - mean;
  fft2_inplace(spec, ph, pw, false);

  constexpr int kBins = 36;
  StreakOrientation so;
  so.wedge_energy.assign(kBins, 0.0);
  const double scale = static_cast<double>(std::min(pw, ph));
  const double nyquist = 0.5 * scale;
  const double rmax = max_radius > 0.0 ? max_radius : nyquist;

  for (int r = 0; r < ph; ++r) {
    const double fy = (r <= ph / 2 ? r : r - ph) / static_cast<double>(ph);
    for (int c = 0; c < pw; ++c) {
      const double fx = (c <= pw / 2 ? c : c - pw) / static_cast<double>(pw);
      const double rad = std::sqrt(fx * fx + fy * fy) * scale;
      if (rad < min_radius || rad > rmax || rad == 0.0) continue;
      double theta = std::atan2(fy, fx);
      if (theta < 0.0) theta += kPi;
      if (theta >= kPi) theta -= kPi;
      int bin = static_cast<int>(theta / (kPi / kBins));
      bin = std::clamp(bin, 0, kBins - 1);
      so.wedge_energy[static_cast<std::size_t>(bin)] +=
          std::norm(spec[static_cast<std::size_t>(r) * pw + c]);
    }
  }

  int best = 0;
  for (int b = 1; b < kBins; ++b)
    if (so.wedge_energy[static_cast<std::size_t>(b)] >
        so.wedge_energy[static_cast<std::size_t>(best)])
      best = b;
  // Streaks in the image run perpendicular to their spectral ridge.
  double orient = (best + 0.5) * (kPi / kBins) + 0.5 * kPi;
  if (orient >= kPi) orient -= kPi;
  so.orientation = orient;
  return so;
}

std::vector<float> axial_slice(const Volume3D& vol, int iz) {
  if (iz < 0 || iz >= vol.nz()) throw DomainError("axial_slice: z out of range");
  std::vector<float> out(static_cast<std::size_t>(vol.ny()) * vol.nx());
  for (int iy = 0; iy < vol.ny(); ++iy)
    for (int ix = 0; ix < vol.nx(); ++ix)
      out[static_cast<std::size_t>(iy) * vol.nx() + ix] = vol.at(iz, iy, ix);
  return out;
}

// ---------- optical flow ----------

namespace {

struct Grid3 {
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> v;
  std::size_t idx(int iz, int iy, int ix) const {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  }
  float at_clamped(int iz, int iy, int ix) const {
    iz = std::clamp(iz, 0, nz - 1);
    iy = std::clamp(iy, 0, ny - 1);
    ix = std::clamp(ix, 0, nx - 1);
    return v[idx(iz, iy, ix)];
  }
  float sample(double z, double y, double x) const {
    const int z0 = static_cast<int>(std::floor(z));
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double az = z - z0, ay = y - y0, ax = x - x0;
    double acc = 0.0;
    for (int dz = 0; dz <= 1; ++dz)
      for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) {
          const double w = (dz ? az : 1.0 - az) * (dy ? ay : 1.0 - ay) *
                           (dx ? ax : 1.0 - ax);
          if (w != 0.0) acc += w * at_clamped(z0 + dz, y0 + dy, x0 + dx);
        }
    return static_cast<float>(acc);
  }
};

Grid3 downsample(const Grid3& g, bool hx, bool hy, bool hz) {
  Grid3 out;
  out.nx = hx ? g.nx / 2 : g.nx;
  out.ny = hy ? g.ny / 2 : g.ny;
  out.nz = hz ? g.nz / 2 : g.nz;
  out.v.resize(static_cast<std::size_t>(out.nx) * out.ny * out.nz);
  for (int iz = 0; iz < out.nz; ++iz)
    for (int iy = 0; iy < out.ny; ++iy)
      for (int ix = 0; ix < out.nx; ++ix) {
        double acc = 0.0;
        int cnt = 0;
        for (int dz = 0; dz < (hz ? 2 : 1); ++dz)
          for (int dy = 0; dy < (hy ? 2 : 1); ++dy)
            for (int dx = 0; dx < (hx ? 2 : 1); ++dx) {
              acc += g.at_clamped((hz ? 2 * iz : iz) + dz, (hy ? 2 * iy : iy) + dy,
                                  (hx ? 2 * ix : ix) + dx);
              ++cnt;
            }
        out.v[out.idx(iz, iy, ix)] = static_cast<float>(acc / cnt);
      }
  return out;
}

// Unnormalized box sums along one axis, radius r, zero beyond the border.
void box_sum_axis(std::vector<float>& data, int nz, int ny, int nx, int axis,
                  int r) {
  const int dims[3] = {nz, ny, nx};
  const std::size_t strides[3] = {static_cast<std::size_t>(ny) * nx,
                                  static_cast<std::size_t>(nx), 1};
  const int na = dims[axis];
  const std::size_t sa = strides[axis];
  std::vector<float> line(static_cast<std::size_t>(na));
  for (int i0 = 0; i0 < (axis == 0 ? 1 : nz); ++i0)
    for (int i1 = 0; i1 < (axis == 1 ? 1 : ny); ++i1)
      for (int i2 = 0; i2 < (axis == 2 ? 1 : nx); ++i2) {
        std::size_t base = static_cast<std::size_t>(i0) * strides[0] +
                           static_cast<std::size_t>(i1) * strides[1] +
                           static_cast<std::size_t>(i2) * strides[2];
        for (int k = 0; k < na; ++k) line[static_cast<std::size_t>(k)] = data[base + static_cast<std::size_t>(k) * sa];
        double run = 0.0;
        for (int k = 0; k <= std::min(r, na - 1); ++k) run += line[static_cast<std::size_t>(k)];
        for (int k = 0; k < na; ++k) {
          data[base + static_cast<std::size_t>(k) * sa] = static_cast<float>(run);
          const int out_i = k - r;
          const int in_i = k + r + 1;
          if (out_i >= 0) run -= line[static_cast<std::size_t>(out_i)];
          if (in_i < na) run += line[static_cast<std::size_t>(in_i)];
        }
      }
}

void box_sum3(std::vector<float>& data, int nz, int ny, int nx, int r) {
  box_sum_axis(data, nz, ny, nx, 0, r);
  box_sum_axis(data, nz, ny, nx, 1, r);
  box_sum_axis(data, nz, ny, nx, 2, r);
}

// Eigenvalues of a symmetric 3x3 (ascending).
void eig3_sym(double a11, double a12, double a13, double a22, double a23,
              double a33, double out[3]) {
  const double p1 = a12 * a12 + a13 * a13 + a23 * a23;
  if (p1 == 0.0) {
    out[0] = std::min({a11, a22, a33});
    out[2] = std::max({a11, a22, a33});
    out[1] = a11 + a22 + a33 - out[0] - out[2];
    return;
  }
  const double q = (a11 + a22 + a33) / 3.0;
  const double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) +
                    (a33 - q) * (a33 - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const double b11 = (a11 - q) / p, b12 = a12 / p, b13 = a13 / p;
  const double b22 = (a22 - q) / p, b23 = a23 / p, b33 = (a33 - q) / p;
  const double detb = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                      b13 * (b12 * b23 - b22 * b13);
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  out[0] = e3;
  out[2] = e1;
  out[1] = 3.0 * q - e1 - e3;
}

struct Pyramid {
  std::vector<Grid3> levels;
};

Pyramid build_pyramid(const Grid3& base, int levels) {
  Pyramid p;
  p.levels.push_back(base);
  for (int l = 1; l < levels; ++l) {
    const Grid3& prev = p.levels.back();
    const bool hx = prev.nx >= 8, hy = prev.ny >= 8, hz = prev.nz >= 8;
    if (!hx && !hy && !hz) break;
    p.levels.push_back(downsample(prev, hx, hy, hz));
  }
  return p;
}

void refine_level(const Grid3& a, const Grid3& b, std::vector<float>& fdx,
                  std::vector<float>& fdy, std::vector<float>& fdz,
                  const LKOptions& opt) {
  const int nx = a.nx, ny = a.ny, nz = a.nz;
  const std::size_t n = a.v.size();
  const int r = opt.window / 2;
  const bool flat_z = nz == 1;

  std::vector<float> ix(n), iy(n), iz_g(n), it(n);
  std::vector<float> sxx(n), sxy(n), sxz(n), syy(n), syz(n), szz(n), sxt(n),
      syt(n), szt(n);

  for (int iter = 0; iter < opt.iterations; ++iter) {
    // Temporal difference against the warped second image and spatial
    // gradients of the first.
#pragma omp parallel for schedule(static)
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          const std::size_t i = a.idx(z, y, x);
          const float warped =
              b.sample(z + fdz[i], y + fdy[i], x + fdx[i]);
          it[i] = warped - a.v[i];
          ix[i] = 0.5f * (a.at_clamped(z, y, x + 1) - a.at_clamped(z, y, x - 1));
          iy[i] = 0.5f * (a.at_clamped(z, y + 1, x) - a.at_clamped(z, y - 1, x));
          iz_g[i] = flat_z ? 0.0f
                           : 0.5f * (a.at_clamped(z + 1, y, x) -
                                     a.at_clamped(z - 1, y, x));
        }
#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(n); ++k) {
      const std::size_t i = static_cast<std::size_t>(k);
      sxx[i] = ix[i] * ix[i];
      sxy[i] = ix[i] * iy[i];
      sxz[i] = ix[i] * iz_g[i];
      syy[i] = iy[i] * iy[i];
      syz[i] = iy[i] * iz_g[i];
      szz[i] = iz_g[i] * iz_g[i];
      sxt[i] = ix[i] * it[i];
      syt[i] = iy[i] * it[i];
      szt[i] = iz_g[i] * it[i];
    }
    box_sum3(sxx, nz, ny, nx, r);
    box_sum3(sxy, nz, ny, nx, r);
    box_sum3(syy, nz, ny, nx, r);
    box_sum3(sxt, nz, ny, nx, r);
    box_sum3(syt, nz, ny, nx, r);
    if (!flat_z) {
      box_sum3(sxz, nz, ny, nx, r);
      box_sum3(syz, nz, ny, nx, r);
      box_sum3(szz, nz, ny, nx, r);
      box_sum3(szt, nz, ny, nx, r);
    }

#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(n); ++k) {
      const std::size_t i = static_cast<std::size_t>(k);
      if (flat_z) {
        const double gxx = sxx[i], gxy = sxy[i], gyy = syy[i];
        const double tr = gxx + gyy;
        const double det = gxx * gyy - gxy * gxy;
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        const double lmax = 0.5 * (tr + disc);
        const double lmin = 0.5 * (tr - disc);
        if (lmin <= 0.0 || lmax / lmin > opt.cond_limit) continue;
        const double bx = -static_cast<double>(sxt[i]);
        const double by = -static_cast<double>(syt[i]);
        fdx[i] += static_cast<float>((gyy * bx - gxy * by) / det);
        fdy[i] += static_cast<float>((gxx * by - gxy * bx) / det);
      } else {
        const double gxx = sxx[i], gxy = sxy[i], gxz = sxz[i];
        const double gyy = syy[i], gyz = syz[i], gzz = szz[i];
        double eig[3];
        eig3_sym(gxx, gxy, gxz, gyy, gyz, gzz, eig);
        if (eig[0] <= 0.0 || eig[2] / eig[0] > opt.cond_limit) continue;
        const double bx = -static_cast<double>(sxt[i]);
        const double by = -static_cast<double>(syt[i]);
        const double bz = -static_cast<double>(szt[i]);
        const double det = gxx * (gyy * gzz - gyz * gyz) -
                           gxy * (gxy * gzz - gyz * gxz) +
                           gxz * (gxy * gyz - gyy * gxz);
        if (det == 0.0) continue;
        const double dx0 = (bx * (gyy * gzz - gyz * gyz) -
                            gxy * (by * gzz - gyz * bz) +
                            gxz * (by * gyz - gyy * bz)) /
                           det;
        const double dy0 = (gxx * (by * gzz - gyz * bz) -
                            bx * (gxy * gzz - gyz * gxz) +
                            gxz * (gxy * bz - by * gxz)) /
                           det;
        const double dz0 = (gxx * (gyy * bz - by * gyz) -
                            gxy * (gxy * bz - by * gxz) +
                            bx * (gxy * gyz - gyy * gxz)) /
                           det;
        fdx[i] += static_cast<float>(dx0);
        fdy[i] += static_cast<float>(dy0);
        fdz[i] += static_cast<float>(dz0);
      }
    }
  }
}

std::vector<float> upsample_component(const std::vector<float>& coarse,
                                      int cnx, int cny, int cnz, int fnx,
                                      int fny, int fnz, double gain) {
  Grid3 g;
  g.nx = cnx;
  g.ny = cny;
  g.nz = cnz;
  g.v = coarse;
  std::vector<float> fine(static_cast<std::size_t>(fnx) * fny * fnz);
  const double sx = static_cast<double>(cnx) / fnx;
  const double sy = static_cast<double>(cny) / fny;
  const double sz = static_cast<double>(cnz) / fnz;
  for (int z = 0; z < fnz; ++z)
    for (int y = 0; y < fny; ++y)
      for (int x = 0; x < fnx; ++x)
        fine[(static_cast<std::size_t>(z) * fny + y) * fnx + x] =
            static_cast<float>(gain * g.sample(z * sz, y * sy, x * sx));
  return fine;
}

FlowField3D lk_impl(const Grid3& ga, const Grid3& gb, const LKOptions& opt) {
  if (ga.nx != gb.nx || ga.ny != gb.ny || ga.nz != gb.nz)
    throw DomainError("lucas_kanade: image dimensions differ");
  if (opt.levels < 1 || opt.window < 3 || opt.window % 2 == 0 ||
      opt.iterations < 1 || !(opt.cond_limit > 1.0))
    throw DomainError("lucas_kanade: bad options");

  const Pyramid pa = build_pyramid(ga, opt.levels);
  const Pyramid pb = build_pyramid(gb, opt.levels);
  const int top = static_cast<int>(pa.levels.size()) - 1;

  std::vector<float> fdx, fdy, fdz;
  for (int l = top; l >= 0; --l) {
    const Grid3& a = pa.levels[static_cast<std::size_t>(l)];
    const Grid3& b = pb.levels[static_cast<std::size_t>(l)];
    if (l == top) {
      fdx.assign(a.v.size(), 0.0f);
      fdy.assign(a.v.size(), 0.0f);
      fdz.assign(a.v.size(), 0.0f);
    } else {
      const Grid3& c = pa.levels[static_cast<std::size_t>(l) + 1];
      fdx = upsample_component(fdx, c.nx, c.ny, c.nz, a.nx, a.ny, a.nz,
                               static_cast<double>(a.nx) / c.nx);
      fdy = upsample_component(fdy, c.nx, c.ny, c.nz, a.nx, a.ny, a.nz,
                               static_cast<double>(a.ny) / c.ny);
      fdz = upsample_component(fdz, c.nx, c.ny, c.nz, a.nx, a.ny, a.nz,
                               static_cast<double>(a.nz) / c.nz);
    }
    refine_level(a, b, fdx, fdy, fdz, opt);
  }

  FlowField3D flow;
  flow.nx = ga.nx;
  flow.ny = ga.ny;
  flow.nz = ga.nz;
  flow.dx = std::move(fdx);
  flow.dy = std::move(fdy);
  flow.dz = std::move(fdz);
  return flow;
}

}  // namespace

FlowField3D lucas_kanade_3d(const Volume3D& a, const Volume3D& b,
                            const LKOptions& opt) {
  Grid3 ga{a.nx(), a.ny(), a.nz(), a.data()};
  Grid3 gb{b.nx(), b.ny(), b.nz(), b.data()};
  return lk_impl(ga, gb, opt);
}

FlowField2D lucas_kanade_2d(const std::vector<float>& a,
                            const std::vector<float>& b, int width, int height,
                            const LKOptions& opt) {
  if (a.size() != static_cast<std::size_t>(width) * height || a.size() != b.size())
    throw DomainError("lucas_kanade_2d: size mismatch");
  Grid3 ga{width, height, 1, a};
  Grid3 gb{width, height, 1, b};
  FlowField3D f3 = lk_impl(ga, gb, opt);
  FlowField2D out;
  out.width = width;
  out.height = height;
  out.dx = std::move(f3.dx);
  out.dy = std::move(f3.dy);
  return out;
}

// ---------- trajectories ----------

namespace {

Vec3 sample_flow(const FlowField3D& f, const Vec3& p) {
  Grid3 gx{f.nx, f.ny, f.nz, f.dx};
  Grid3 gy{f.nx, f.ny, f.nz, f.dy};
  Grid3 gz{f.nx, f.ny, f.nz, f.dz};
  return {gx.sample(p.z, p.y, p.x), gy.sample(p.z, p.y, p.x),
          gz.sample(p.z, p.y, p.x)};
}

}  // namespace

std::vector<Trajectory> track_trajectories(const std::vector<FlowField3D>& flows,
                                           const Mask& seed_mask, int nx, int ny,
                                           int nz, int stride) {
  if (flows.empty()) throw DomainError("track_trajectories: no flows");
  if (stride < 1) throw DomainError("track_trajectories: stride < 1");
  for (const FlowField3D& f : flows)
    if (f.nx != nx || f.ny != ny || f.nz != nz)
      throw DomainError("track_trajectories: flow dimensions differ");
  if (seed_mask.size() != static_cast<std::size_t>(nx) * ny * nz)
    throw DomainError("track_trajectories: seed mask size mismatch");

  std::vector<Trajectory> out;
  for (int iz = 0; iz < nz; iz += stride)
    for (int iy = 0; iy < ny; iy += stride)
      for (int ix = 0; ix < nx; ix += stride) {
        if (!seed_mask[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix])
          continue;
        Trajectory tr;
        tr.seed = {static_cast<double>(ix), static_cast<double>(iy),
                   static_cast<double>(iz)};
        Vec3 p = tr.seed;
        for (const FlowField3D& f : flows) {
          const Vec3 d = sample_flow(f, p);
          tr.displacements.push_back(d);
          p += d;
          if (p.x < 0.0 || p.x > nx - 1 || p.y < 0.0 || p.y > ny - 1 ||
              p.z < 0.0 || p.z > nz - 1) {
            tr.truncated = true;
            break;
          }
        }
        out.push_back(std::move(tr));
      }
  return out;
}

AxisStats axis_flow_stats(const std::vector<Trajectory>& trajectories) {
  AxisStats st;
  for (const Trajectory& tr : trajectories) {
    if (tr.truncated) continue;
    for (const Vec3& d : tr.displacements) {
      st.mean_abs_dx += std::abs(d.x);
      st.mean_abs_dy += std::abs(d.y);
      st.mean_abs_dz += std::abs(d.z);
      ++st.steps;
    }
  }
  if (st.steps == 0) throw DomainError("axis_flow_stats: no complete trajectories");
  st.mean_abs_dx /= static_cast<double>(st.steps);
  st.mean_abs_dy /= static_cast<double>(st.steps);
  st.mean_abs_dz /= static_cast<double>(st.steps);
  return st;
}

std::vector<std::vector<double>> trajectory_features(
    const std::vector<Trajectory>& trajectories) {
  std::vector<std::vector<double>> out;
  for (const Trajectory& tr : trajectories) {
    if (tr.truncated) continue;
    std::vector<double> row;
    row.reserve(tr.displacements.size() * 3);
    for (const Vec3& d : tr.displacements) {
      row.push_back(d.x);
      row.push_back(d.y);
      row.push_back(d.z);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<int> kmeans2(const std::vector<std::vector<double>>& features,
                         int max_iterations) {
  if (features.size() < 2) throw DomainError("kmeans2: need >= 2 rows");
  const std::size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw DomainError("kmeans2: ragged features");

  // Deterministic extremal init: lowest- and highest-norm rows.
  std::size_t lo = 0, hi = 0;
  double lo_n = std::numeric_limits<double>::max(), hi_n = -1.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double n2 = 0.0;
    for (double v : features[i]) n2 += v * v;
    if (n2 < lo_n) {
      lo_n = n2;
      lo = i;
    }
    if (n2 > hi_n) {
      hi_n = n2;
      hi = i;
    }
  }
  std::vector<std::vector<double>> centers{features[lo], features[hi]};
  std::vector<int> labels(features.size(), 0);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
      double d[2] = {0.0, 0.0};
      for (int c = 0; c < 2; ++c)
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = features[i][k] - centers[static_cast<std::size_t>(c)][k];
          d[c] += diff * diff;
        }
      const int lbl = d[1] < d[0] ? 1 : 0;
      if (lbl != labels[i]) {
        labels[i] = lbl;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (int c = 0; c < 2; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] != c) continue;
        for (std::size_t k = 0; k < dim; ++k) mean[k] += features[i][k];
        ++cnt;
      }
      if (cnt == 0) continue;  // keep the previous centre
      for (std::size_t k = 0; k < dim; ++k) mean[k] /= static_cast<double>(cnt);
      centers[static_cast<std::size_t>(c)] = std::move(mean);
    }
  }
  return labels;
}

}  // namespace rstar
