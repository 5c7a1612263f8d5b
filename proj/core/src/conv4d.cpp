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

#include "rstar/conv4d.hpp"

#include <algorithm>
#include <cmath>

namespace rstar {

template <typename T>
void Conv2dXY<T>::validate() const {
  if (cout < 1 || cin < 1) throw DomainError("Conv2dXY: bad channel counts");
  if (k != 1 && k != 3) throw DomainError("Conv2dXY: kernel extent must be 1 or 3");
  if (w.size() != static_cast<std::size_t>(cout) * cin * k * k ||
      b.size() != static_cast<std::size_t>(cout))
    throw DomainError("Conv2dXY: parameter sizes inconsistent with channels");
}

template <typename T>
void Conv1d<T>::validate() const {
  if (ch < 1) throw DomainError("Conv1d: bad channel count");
  if (w.size() != static_cast<std::size_t>(ch) * ch * 3 ||
      b.size() != static_cast<std::size_t>(ch))
    throw DomainError("Conv1d: parameter sizes inconsistent with channels");
}

template <typename T>
void SepConv4DBlock<T>::validate() const {
  xy.validate();
  z.validate();
  t.validate();
  if (xy.k != 3) throw DomainError("SepConv4DBlock: x-y kernel extent must be 3");
  if (z.ch != xy.cout || t.ch != xy.cout)
    throw DomainError("SepConv4DBlock: sub-convolution channels disagree");
}

template <typename T>
void Iso4DConvBlock<T>::validate() const {
  if (cout < 1 || cin < 1) throw DomainError("Iso4DConvBlock: bad channel counts");
  if (w.size() != static_cast<std::size_t>(cout) * cin * 81 ||
      b.size() != static_cast<std::size_t>(cout))
    throw DomainError("Iso4DConvBlock: parameter sizes inconsistent with channels");
}

template <typename T>
Conv2dXY<T> make_conv2d(int cin, int cout, int k) {
  Conv2dXY<T> c;
  c.cout = cout;
  c.cin = cin;
  c.k = k;
  c.w.assign(static_cast<std::size_t>(cout) * cin * k * k, T(0));
  c.b.assign(static_cast<std::size_t>(cout), T(0));
  c.validate();
  return c;
}

template <typename T>
Conv1d<T> make_conv1d(int ch) {
  Conv1d<T> c;
  c.ch = ch;
  c.w.assign(static_cast<std::size_t>(ch) * ch * 3, T(0));
  c.b.assign(static_cast<std::size_t>(ch), T(0));
  c.validate();
  return c;
}

template <typename T>
SepConv4DBlock<T> make_sepconv4d(int cin, int cout) {
  SepConv4DBlock<T> blk;
  blk.xy = make_conv2d<T>(cin, cout, 3);
  blk.z = make_conv1d<T>(cout);
  blk.t = make_conv1d<T>(cout);
  return blk;
}

template <typename T>
Iso4DConvBlock<T> make_iso4d(int cin, int cout) {
  Iso4DConvBlock<T> blk;
  blk.cout = cout;
  blk.cin = cin;
  blk.w.assign(static_cast<std::size_t>(cout) * cin * 81, T(0));
  blk.b.assign(static_cast<std::size_t>(cout), T(0));
  return blk;
}

template <typename T>
Conv2dXY<T> zero_like(const Conv2dXY<T>& c) {
  return make_conv2d<T>(c.cin, c.cout, c.k);
}

template <typename T>
SepConv4DBlock<T> zero_like(const SepConv4DBlock<T>& blk) {
  SepConv4DBlock<T> z = make_sepconv4d<T>(blk.cin(), blk.cout());
  z.skip_z = blk.skip_z;
  z.frozen_z = blk.frozen_z;
  return z;
}

namespace {

template <typename T>
void fill_uniform(std::vector<T>& v, double limit, Rng& rng) {
  for (T& x : v) x = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace

template <typename T>
void he_uniform_init(Conv2dXY<T>& c, Rng& rng) {
  fill_uniform(c.w, std::sqrt(6.0 / (static_cast<double>(c.cin) * c.k * c.k)), rng);
}

template <typename T>
void he_uniform_init(Conv1d<T>& c, Rng& rng) {
  fill_uniform(c.w, std::sqrt(6.0 / (static_cast<double>(c.ch) * 3.0)), rng);
}

template <typename T>
void he_uniform_init(SepConv4DBlock<T>& blk, Rng& rng) {
  he_uniform_init(blk.xy, rng);
  he_uniform_init(blk.z, rng);
  he_uniform_init(blk.t, rng);
}

// ---------- x-y convolution ----------

template <typename T>
Tensor5<T> conv2d_xy_forward(const Tensor5<T>& in, const Conv2dXY<T>& c) {
  c.validate();
  if (in.c() != c.cin) throw DomainError("conv2d_xy_forward: channel mismatch");
  const int nt = in.t(), nz = in.z(), ny = in.y(), nx = in.x();
  const int r = c.k / 2;
  Tensor5<T> out(c.cout, nt, nz, ny, nx);
  const std::size_t np = out.plane();
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < c.cout; ++co)
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        T* op = &out.at(co, it, iz, 0, 0);
        const T bias = c.b[static_cast<std::size_t>(co)];
        for (std::size_t p = 0; p < np; ++p) op[p] = bias;
        for (int ci = 0; ci < c.cin; ++ci) {
          const T* ip = &in.at(ci, it, iz, 0, 0);
          const T* wp =
              &c.w[(static_cast<std::size_t>(co) * c.cin + ci) * c.k * c.k];
          for (int ky = -r; ky <= r; ++ky)
            for (int kx = -r; kx <= r; ++kx) {
              const T wv = wp[(ky + r) * c.k + (kx + r)];
              if (wv == T(0)) continue;
              const int y0 = std::max(0, -ky), y1 = ny - std::max(0, ky);
              const int x0 = std::max(0, -kx), x1 = nx - std::max(0, kx);
              for (int iy = y0; iy < y1; ++iy) {
                T* orow = op + static_cast<std::size_t>(iy) * nx;
                const T* irow =
                    ip + static_cast<std::size_t>(iy + ky) * nx + kx;
                for (int ix = x0; ix < x1; ++ix) orow[ix] += wv * irow[ix];
              }
            }
        }
      }
  return out;
}

template <typename T>
Tensor5<T> conv2d_xy_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                              const Conv2dXY<T>& c, Conv2dXY<T>& grads) {
  c.validate();
  grads.validate();
  if (in.c() != c.cin || gout.c() != c.cout)
    throw DomainError("conv2d_xy_backward: channel mismatch");
  if (gout.t() != in.t() || gout.z() != in.z() || gout.y() != in.y() ||
      gout.x() != in.x())
    throw DomainError("conv2d_xy_backward: shape mismatch");
  const int nt = in.t(), nz = in.z(), ny = in.y(), nx = in.x();
  const int r = c.k / 2;
  Tensor5<T> gin(c.cin, nt, nz, ny, nx);

  // out[p] = sum_o w[o] in[p+o]  =>  gin[q] = sum_o w[o] gout[q-o].
#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < c.cin; ++ci)
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        T* gp = &gin.at(ci, it, iz, 0, 0);
        for (int co = 0; co < c.cout; ++co) {
          const T* gop = &gout.at(co, it, iz, 0, 0);
          const T* wp =
              &c.w[(static_cast<std::size_t>(co) * c.cin + ci) * c.k * c.k];
          for (int ky = -r; ky <= r; ++ky)
            for (int kx = -r; kx <= r; ++kx) {
              const T wv = wp[(ky + r) * c.k + (kx + r)];
              if (wv == T(0)) continue;
              const int y0 = std::max(0, ky), y1 = ny + std::min(0, ky);
              const int x0 = std::max(0, kx), x1 = nx + std::min(0, kx);
              for (int iy = y0; iy < y1; ++iy) {
                T* grow = gp + static_cast<std::size_t>(iy) * nx;
                const T* gorow =
                    gop + static_cast<std::size_t>(iy - ky) * nx - kx;
                for (int ix = x0; ix < x1; ++ix) grow[ix] += wv * gorow[ix];
              }
            }
        }
      }

#pragma omp parallel for schedule(static)
  for (int co = 0; co < c.cout; ++co) {
    for (int ci = 0; ci < c.cin; ++ci)
      for (int ky = -r; ky <= r; ++ky)
        for (int kx = -r; kx <= r; ++kx) {
          double acc = 0.0;
          const int y0 = std::max(0, -ky), y1 = ny - std::max(0, ky);
          const int x0 = std::max(0, -kx), x1 = nx - std::max(0, kx);
          for (int it = 0; it < nt; ++it)
            for (int iz = 0; iz < nz; ++iz) {
              const T* gop = &gout.at(co, it, iz, 0, 0);
              const T* ip = &in.at(ci, it, iz, 0, 0);
              for (int iy = y0; iy < y1; ++iy) {
                const T* gorow = gop + static_cast<std::size_t>(iy) * nx;
                const T* irow =
                    ip + static_cast<std::size_t>(iy + ky) * nx + kx;
                for (int ix = x0; ix < x1; ++ix)
                  acc += static_cast<double>(gorow[ix]) * irow[ix];
              }
            }
          grads.w[(static_cast<std::size_t>(co) * c.cin + ci) * c.k * c.k +
                  static_cast<std::size_t>(ky + r) * c.k + (kx + r)] +=
              static_cast<T>(acc);
        }
    double bacc = 0.0;
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        const T* gop = &gout.at(co, it, iz, 0, 0);
        for (std::size_t p = 0; p < gout.plane(); ++p) bacc += gop[p];
      }
    grads.b[static_cast<std::size_t>(co)] += static_cast<T>(bacc);
  }
  return gin;
}

// ---------- z convolution (zero padding) ----------

template <typename T>
Tensor5<T> conv1d_z_forward(const Tensor5<T>& in, const Conv1d<T>& c) {
  c.validate();
  if (in.c() != c.ch) throw DomainError("conv1d_z_forward: channel mismatch");
  const int nt = in.t(), nz = in.z();
  Tensor5<T> out(c.ch, nt, nz, in.y(), in.x());
  const std::size_t np = out.plane();
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < c.ch; ++co)
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        T* op = &out.at(co, it, iz, 0, 0);
        const T bias = c.b[static_cast<std::size_t>(co)];
        for (std::size_t p = 0; p < np; ++p) op[p] = bias;
        for (int ci = 0; ci < c.ch; ++ci)
          for (int o = -1; o <= 1; ++o) {
            const int zz = iz + o;
            if (zz < 0 || zz >= nz) continue;
            const T wv = c.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 +
                             (o + 1)];
            if (wv == T(0)) continue;
            const T* ip = &in.at(ci, it, zz, 0, 0);
            for (std::size_t p = 0; p < np; ++p) op[p] += wv * ip[p];
          }
      }
  return out;
}

template <typename T>
Tensor5<T> conv1d_z_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                             const Conv1d<T>& c, Conv1d<T>& grads) {
  c.validate();
  grads.validate();
  if (!gout.same_shape(in) || in.c() != c.ch)
    throw DomainError("conv1d_z_backward: shape mismatch");
  const int nt = in.t(), nz = in.z();
  const std::size_t np = in.plane();
  Tensor5<T> gin(c.ch, nt, nz, in.y(), in.x());
#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < c.ch; ++ci)
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        T* gp = &gin.at(ci, it, iz, 0, 0);
        for (int co = 0; co < c.ch; ++co)
          for (int o = -1; o <= 1; ++o) {
            const int zz = iz - o;
            if (zz < 0 || zz >= nz) continue;
            const T wv = c.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 +
                             (o + 1)];
            if (wv == T(0)) continue;
            const T* gop = &gout.at(co, it, zz, 0, 0);
            for (std::size_t p = 0; p < np; ++p) gp[p] += wv * gop[p];
          }
      }
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c.ch; ++co) {
    for (int ci = 0; ci < c.ch; ++ci)
      for (int o = -1; o <= 1; ++o) {
        double acc = 0.0;
        for (int it = 0; it < nt; ++it)
          for (int iz = 0; iz < nz; ++iz) {
            const int zz = iz + o;
            if (zz < 0 || zz >= nz) continue;
            const T* gop = &gout.at(co, it, iz, 0, 0);
            const T* ip = &in.at(ci, it, zz, 0, 0);
            for (std::size_t p = 0; p < np; ++p)
              acc += static_cast<double>(gop[p]) * ip[p];
          }
        grads.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 + (o + 1)] +=
            static_cast<T>(acc);
      }
    double bacc = 0.0;
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz) {
        const T* gop = &gout.at(co, it, iz, 0, 0);
        for (std::size_t p = 0; p < np; ++p) bacc += gop[p];
      }
    grads.b[static_cast<std::size_t>(co)] += static_cast<T>(bacc);
  }
  return gin;
}

// ---------- t convolution (circular padding) ----------

template <typename T>
Tensor5<T> conv1d_t_forward(const Tensor5<T>& in, const Conv1d<T>& c) {
  c.validate();
  if (in.c() != c.ch) throw DomainError("conv1d_t_forward: channel mismatch");
  const int nt = in.t();
  const std::size_t slab = static_cast<std::size_t>(in.z()) * in.plane();
  Tensor5<T> out(c.ch, nt, in.z(), in.y(), in.x());
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < c.ch; ++co)
    for (int it = 0; it < nt; ++it) {
      T* op = &out.at(co, it, 0, 0, 0);
      const T bias = c.b[static_cast<std::size_t>(co)];
      for (std::size_t p = 0; p < slab; ++p) op[p] = bias;
      for (int ci = 0; ci < c.ch; ++ci)
        for (int o = -1; o <= 1; ++o) {
          const int tt = (it + o + nt) % nt;
          const T wv =
              c.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 + (o + 1)];
          if (wv == T(0)) continue;
          const T* ip = &in.at(ci, tt, 0, 0, 0);
          for (std::size_t p = 0; p < slab; ++p) op[p] += wv * ip[p];
        }
    }
  return out;
}

template <typename T>
Tensor5<T> conv1d_t_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                             const Conv1d<T>& c, Conv1d<T>& grads) {
  c.validate();
  grads.validate();
  if (!gout.same_shape(in) || in.c() != c.ch)
    throw DomainError("conv1d_t_backward: shape mismatch");
  const int nt = in.t();
  const std::size_t slab = static_cast<std::size_t>(in.z()) * in.plane();
  Tensor5<T> gin(c.ch, nt, in.z(), in.y(), in.x());
#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < c.ch; ++ci)
    for (int it = 0; it < nt; ++it) {
      T* gp = &gin.at(ci, it, 0, 0, 0);
      for (int co = 0; co < c.ch; ++co)
        for (int o = -1; o <= 1; ++o) {
          const int tt = (it - o + nt) % nt;
          const T wv =
              c.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 + (o + 1)];
          if (wv == T(0)) continue;
          const T* gop = &gout.at(co, tt, 0, 0, 0);
          for (std::size_t p = 0; p < slab; ++p) gp[p] += wv * gop[p];
        }
    }
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c.ch; ++co) {
    for (int ci = 0; ci < c.ch; ++ci)
      for (int o = -1; o <= 1; ++o) {
        double acc = 0.0;
        for (int it = 0; it < nt; ++it) {
          const int tt = (it + o + nt) % nt;
          const T* gop = &gout.at(co, it, 0, 0, 0);
          const T* ip = &in.at(ci, tt, 0, 0, 0);
          for (std::size_t p = 0; p < slab; ++p)
            acc += static_cast<double>(gop[p]) * ip[p];
        }
        grads.w[(static_cast<std::size_t>(co) * c.ch + ci) * 3 + (o + 1)] +=
            static_cast<T>(acc);
      }
    double bacc = 0.0;
    for (int it = 0; it < nt; ++it) {
      const T* gop = &gout.at(co, it, 0, 0, 0);
      for (std::size_t p = 0; p < slab; ++p) bacc += gop[p];
    }
    grads.b[static_cast<std::size_t>(co)] += static_cast<T>(bacc);
  }
  return gin;
}

// ---------- separable block ----------

template <typename T>
Tensor5<T> sepconv4d_forward(const Tensor5<T>& in, const SepConv4DBlock<T>& blk,
                             SepConvCache<T>* cache) {
  blk.validate();
  if (in.c() != blk.cin()) throw DomainError("sepconv4d_forward: channel mismatch");
  Tensor5<T> x1 = conv2d_xy_forward(in, blk.xy);
  Tensor5<T> x2;
  if (!blk.skip_z) x2 = conv1d_z_forward(x1, blk.z);
  Tensor5<T> out = conv1d_t_forward(blk.skip_z ? x1 : x2, blk.t);
  if (cache) {
    cache->x0 = in;
    cache->x1 = std::move(x1);
    cache->x2 = std::move(x2);
  }
  return out;
}

template <typename T>
Tensor5<T> sepconv4d_backward(const Tensor5<T>& gout,
                              const SepConvCache<T>& cache,
                              const SepConv4DBlock<T>& blk,
                              SepConv4DBlock<T>& grads) {
  blk.validate();
  Tensor5<T> g2 =
      conv1d_t_backward(gout, blk.skip_z ? cache.x1 : cache.x2, blk.t, grads.t);
  Tensor5<T> g1;
  if (blk.skip_z) {
    g1 = std::move(g2);
  } else if (blk.frozen_z) {
    Conv1d<T> discard = make_conv1d<T>(blk.z.ch);
    g1 = conv1d_z_backward(g2, cache.x1, blk.z, discard);
  } else {
    g1 = conv1d_z_backward(g2, cache.x1, blk.z, grads.z);
  }
  return conv2d_xy_backward(g1, cache.x0, blk.xy, grads.xy);
}

// ---------- isotropic 4D convolution ----------

template <typename T>
Tensor5<T> iso4dconv_forward(const Tensor5<T>& in, const Iso4DConvBlock<T>& blk) {
  blk.validate();
  if (in.c() != blk.cin) throw DomainError("iso4dconv_forward: channel mismatch");
  const int nt = in.t(), nz = in.z(), ny = in.y(), nx = in.x();
  Tensor5<T> out(blk.cout, nt, nz, ny, nx);
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < blk.cout; ++co)
    for (int it = 0; it < nt; ++it)
      for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
          for (int ix = 0; ix < nx; ++ix) {
            T acc = blk.b[static_cast<std::size_t>(co)];
            for (int ci = 0; ci < blk.cin; ++ci) {
              const T* wp =
                  &blk.w[(static_cast<std::size_t>(co) * blk.cin + ci) * 81];
              for (int kt = 0; kt < 3; ++kt) {
                const int tt = (it + kt - 1 + nt) % nt;
                for (int kz = 0; kz < 3; ++kz) {
                  const int zz = iz + kz - 1;
                  if (zz < 0 || zz >= nz) continue;
                  for (int ky = 0; ky < 3; ++ky) {
                    const int yy = iy + ky - 1;
                    if (yy < 0 || yy >= ny) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                      const int xx = ix + kx - 1;
                      if (xx < 0 || xx >= nx) continue;
                      acc += wp[((kt * 3 + kz) * 3 + ky) * 3 + kx] *
                             in.at(ci, tt, zz, yy, xx);
                    }
                  }
                }
              }
            }
            out.at(co, it, iz, iy, ix) = acc;
          }
  return out;
}

template <typename T>
Iso4DConvBlock<T> compose_kernel(const SepConv4DBlock<T>& blk) {
  blk.validate();
  for (const T v : blk.xy.b)
    if (v != T(0)) throw DomainError("compose_kernel: nonzero x-y bias");
  if (!blk.skip_z)
    for (const T v : blk.z.b)
      if (v != T(0)) throw DomainError("compose_kernel: nonzero z bias");
  const int C = blk.cout();
  const int cin = blk.cin();
  Iso4DConvBlock<T> iso = make_iso4d<T>(cin, C);
  iso.b = blk.t.b;
  for (int co = 0; co < C; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int kt = 0; kt < 3; ++kt)
        for (int kz = 0; kz < 3; ++kz)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              double acc = 0.0;
              for (int m = 0; m < C; ++m) {
                const double wt =
                    blk.t.w[(static_cast<std::size_t>(co) * C + m) * 3 + kt];
                double inner = 0.0;
                if (blk.skip_z) {
                  if (kz == 1)
                    inner = blk.xy.w[((static_cast<std::size_t>(m) * cin + ci) *
                                          3 +
                                      ky) *
                                         3 +
                                     kx];
                } else {
                  for (int n = 0; n < C; ++n)
                    inner +=
                        static_cast<double>(
                            blk.z.w[(static_cast<std::size_t>(m) * C + n) * 3 +
                                    kz]) *
                        blk.xy.w[((static_cast<std::size_t>(n) * cin + ci) * 3 +
                                  ky) *
                                     3 +
                                 kx];
                }
                acc += wt * inner;
              }
              iso.w[((((static_cast<std::size_t>(co) * cin + ci) * 3 + kt) * 3 +
                      kz) *
                         3 +
                     ky) *
                        3 +
                    kx] = static_cast<T>(acc);
            }
  return iso;
}

template <typename T>
std::size_t weight_count(const Conv2dXY<T>& c) {
  return c.w.size();
}

template <typename T>
std::size_t weight_count(const SepConv4DBlock<T>& blk) {
  return blk.xy.w.size() + blk.z.w.size() + blk.t.w.size();
}

template <typename T>
std::size_t weight_count(const Iso4DConvBlock<T>& blk) {
  return blk.w.size();
}

#define RSTAR_INSTANTIATE_CONV(T)                                              \
  template struct Conv2dXY<T>;                                                 \
  template struct Conv1d<T>;                                                   \
  template struct SepConv4DBlock<T>;                                           \
  template struct Iso4DConvBlock<T>;                                           \
  template Conv2dXY<T> make_conv2d<T>(int, int, int);                          \
  template Conv1d<T> make_conv1d<T>(int);                                      \
  template SepConv4DBlock<T> make_sepconv4d<T>(int, int);                      \
  template Iso4DConvBlock<T> make_iso4d<T>(int, int);                          \
  template Conv2dXY<T> zero_like<T>(const Conv2dXY<T>&);                       \
  template SepConv4DBlock<T> zero_like<T>(const SepConv4DBlock<T>&);           \
  template void he_uniform_init<T>(Conv2dXY<T>&, Rng&);                        \
  template void he_uniform_init<T>(Conv1d<T>&, Rng&);                          \
  template void he_uniform_init<T>(SepConv4DBlock<T>&, Rng&);                  \
  template Tensor5<T> conv2d_xy_forward<T>(const Tensor5<T>&,                  \
                                           const Conv2dXY<T>&);               \
  template Tensor5<T> conv1d_z_forward<T>(const Tensor5<T>&, const Conv1d<T>&); \
  template Tensor5<T> conv1d_t_forward<T>(const Tensor5<T>&, const Conv1d<T>&); \
  template Tensor5<T> conv2d_xy_backward<T>(const Tensor5<T>&,                 \
                                            const Tensor5<T>&,                \
                                            const Conv2dXY<T>&, Conv2dXY<T>&); \
  template Tensor5<T> conv1d_z_backward<T>(const Tensor5<T>&, const Tensor5<T>&, \
                                           const Conv1d<T>&, Conv1d<T>&);     \
  template Tensor5<T> conv1d_t_backward<T>(const Tensor5<T>&, const Tensor5<T>&, \
                                           const Conv1d<T>&, Conv1d<T>&);     \
  template Tensor5<T> sepconv4d_forward<T>(const Tensor5<T>&,                  \
                                           const SepConv4DBlock<T>&,          \
                                           SepConvCache<T>*);                 \
  template Tensor5<T> sepconv4d_backward<T>(                                   \
      const Tensor5<T>&, const SepConvCache<T>&, const SepConv4DBlock<T>&,     \
      SepConv4DBlock<T>&);                                                     \
  template Tensor5<T> iso4dconv_forward<T>(const Tensor5<T>&,                  \
                                           const Iso4DConvBlock<T>&);         \
  template Iso4DConvBlock<T> compose_kernel<T>(const SepConv4DBlock<T>&);      \
  template std::size_t weight_count<T>(const Conv2dXY<T>&);                    \
  template std::size_t weight_count<T>(const SepConv4DBlock<T>&);              \
  template std::size_t weight_count<T>(const Iso4DConvBlock<T>&);

RSTAR_INSTANTIATE_CONV(float)
RSTAR_INSTANTIATE_CONV(double)

#undef RSTAR_INSTANTIATE_CONV

}  // namespace rstar
