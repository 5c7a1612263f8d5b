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

#include "rstar/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rstar {

void NetworkConfig::validate() const {
  if (levels < 1) throw DomainError("NetworkConfig: levels must be >= 1");
  if (static_cast<int>(channels.size()) != levels)
    throw DomainError("NetworkConfig: one channel count per level required");
  for (int c : channels)
    if (c < 1) throw DomainError("NetworkConfig: channels must be >= 1");
  if (in_channels < 1) throw DomainError("NetworkConfig: in_channels must be >= 1");
}

template <typename T>
void Network<T>::validate() const {
  cfg.validate();
  const int L = cfg.levels;
  if (static_cast<int>(enc.size()) != 2 * L ||
      static_cast<int>(dec.size()) != 2 * (L - 1))
    throw DomainError("Network: block counts inconsistent with levels");
  for (const auto& b : enc) b.validate();
  for (const auto& b : dec) b.validate();
  head.validate();
  if (head.k != 1 || head.cout != 1 || head.cin != cfg.channels.front())
    throw DomainError("Network: head must be a 1x1 convolution to one channel");
}

template <typename T>
void Network<T>::set_stage1_mode(bool on) {
  for (auto& b : enc) {
    b.skip_z = on;
    b.frozen_z = on;
  }
  for (auto& b : dec) {
    b.skip_z = on;
    b.frozen_z = on;
  }
}

template <typename T>
Network<T> build_network(const NetworkConfig& cfg, Rng& rng) {
  cfg.validate();
  Network<T> net;
  net.cfg = cfg;
  const int L = cfg.levels;
  int cin = cfg.in_channels;
  for (int l = 0; l < L; ++l) {
    const int ch = cfg.channels[static_cast<std::size_t>(l)];
    net.enc.push_back(make_sepconv4d<T>(cin, ch));
    net.enc.push_back(make_sepconv4d<T>(ch, ch));
    cin = ch;
  }
  for (int l = L - 2; l >= 0; --l) {
    const int ch = cfg.channels[static_cast<std::size_t>(l)];
    const int cc = cfg.channels[static_cast<std::size_t>(l) + 1] + ch;
    net.dec.push_back(make_sepconv4d<T>(cc, ch));
    net.dec.push_back(make_sepconv4d<T>(ch, ch));
  }
  net.head = make_conv2d<T>(cfg.channels.front(), 1, 1);
  for (auto& b : net.enc) he_uniform_init(b, rng);
  for (auto& b : net.dec) he_uniform_init(b, rng);
  he_uniform_init(net.head, rng);
  return net;
}

template <typename T>
Network<T> zero_like(const Network<T>& net) {
  Network<T> z;
  z.cfg = net.cfg;
  for (const auto& b : net.enc) z.enc.push_back(zero_like(b));
  for (const auto& b : net.dec) z.dec.push_back(zero_like(b));
  z.head = zero_like(net.head);
  return z;
}

// ---------- layer primitives ----------

namespace {

template <typename T>
void relu_inplace(Tensor5<T>& t, std::vector<std::uint8_t>* mask) {
  if (mask) mask->resize(t.size());
  T* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool pos = p[i] > T(0);
    if (!pos) p[i] = T(0);
    if (mask) (*mask)[i] = pos ? 1 : 0;
  }
}

template <typename T>
void relu_backward(Tensor5<T>& g, const std::vector<std::uint8_t>& mask) {
  if (g.size() != mask.size()) throw DomainError("relu_backward: mask mismatch");
  T* p = g.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask[i]) p[i] = T(0);
}

template <typename T>
Tensor5<T> avg_pool(const Tensor5<T>& in, bool pz) {
  if (in.y() % 2 || in.x() % 2)
    throw DomainError("avg_pool: x and y extents must be even");
  const int oz = pz ? in.z() / 2 : in.z();
  Tensor5<T> out(in.c(), in.t(), oz, in.y() / 2, in.x() / 2);
  const T inv = T(1) / T(pz ? 8 : 4);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < in.c(); ++c)
    for (int t = 0; t < in.t(); ++t)
      for (int z = 0; z < oz; ++z)
        for (int y = 0; y < out.y(); ++y)
          for (int x = 0; x < out.x(); ++x) {
            T acc = T(0);
            for (int dz = 0; dz < (pz ? 2 : 1); ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                  acc += in.at(c, t, (pz ? 2 * z : z) + dz, 2 * y + dy,
                               2 * x + dx);
            out.at(c, t, z, y, x) = acc * inv;
          }
  return out;
}

template <typename T>
Tensor5<T> avg_pool_backward(const Tensor5<T>& gp, int fz, int fy, int fx,
                             bool pz) {
  Tensor5<T> g(gp.c(), gp.t(), fz, fy, fx);
  const T inv = T(1) / T(pz ? 8 : 4);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < gp.c(); ++c)
    for (int t = 0; t < gp.t(); ++t)
      for (int z = 0; z < fz; ++z)
        for (int y = 0; y < fy; ++y)
          for (int x = 0; x < fx; ++x)
            g.at(c, t, z, y, x) =
                gp.at(c, t, pz ? z / 2 : z, y / 2, x / 2) * inv;
  return g;
}

template <typename T>
Tensor5<T> upsample_nearest(const Tensor5<T>& in, bool fz) {
  Tensor5<T> out(in.c(), in.t(), fz ? in.z() * 2 : in.z(), in.y() * 2,
                 in.x() * 2);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < out.c(); ++c)
    for (int t = 0; t < out.t(); ++t)
      for (int z = 0; z < out.z(); ++z)
        for (int y = 0; y < out.y(); ++y)
          for (int x = 0; x < out.x(); ++x)
            out.at(c, t, z, y, x) = in.at(c, t, fz ? z / 2 : z, y / 2, x / 2);
  return out;
}

template <typename T>
Tensor5<T> upsample_backward(const Tensor5<T>& gf, bool fz) {
  if (gf.y() % 2 || gf.x() % 2 || (fz && gf.z() % 2))
    throw DomainError("upsample_backward: odd fine extents");
  Tensor5<T> g(gf.c(), gf.t(), fz ? gf.z() / 2 : gf.z(), gf.y() / 2,
               gf.x() / 2);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < g.c(); ++c)
    for (int t = 0; t < g.t(); ++t)
      for (int z = 0; z < g.z(); ++z)
        for (int y = 0; y < g.y(); ++y)
          for (int x = 0; x < g.x(); ++x) {
            T acc = T(0);
            for (int dz = 0; dz < (fz ? 2 : 1); ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                  acc += gf.at(c, t, (fz ? 2 * z : z) + dz, 2 * y + dy,
                               2 * x + dx);
            g.at(c, t, z, y, x) = acc;
          }
  return g;
}

template <typename T>
Tensor5<T> concat_c(const Tensor5<T>& a, const Tensor5<T>& b) {
  if (a.t() != b.t() || a.z() != b.z() || a.y() != b.y() || a.x() != b.x())
    throw DomainError("concat_c: spatial dims differ");
  Tensor5<T> out(a.c() + b.c(), a.t(), a.z(), a.y(), a.x());
  const std::size_t chunk = a.size() / static_cast<std::size_t>(a.c());
  for (int c = 0; c < a.c(); ++c)
    std::copy_n(a.data() + static_cast<std::size_t>(c) * chunk, chunk,
                out.data() + static_cast<std::size_t>(c) * chunk);
  for (int c = 0; c < b.c(); ++c)
    std::copy_n(b.data() + static_cast<std::size_t>(c) * chunk, chunk,
                out.data() + (static_cast<std::size_t>(a.c()) + c) * chunk);
  return out;
}

template <typename T>
std::pair<Tensor5<T>, Tensor5<T>> split_c(const Tensor5<T>& g, int ca) {
  if (ca < 1 || ca >= g.c()) throw DomainError("split_c: bad channel split");
  Tensor5<T> a(ca, g.t(), g.z(), g.y(), g.x());
  Tensor5<T> b(g.c() - ca, g.t(), g.z(), g.y(), g.x());
  const std::size_t chunk = g.size() / static_cast<std::size_t>(g.c());
  for (int c = 0; c < ca; ++c)
    std::copy_n(g.data() + static_cast<std::size_t>(c) * chunk, chunk,
                a.data() + static_cast<std::size_t>(c) * chunk);
  for (int c = 0; c < g.c() - ca; ++c)
    std::copy_n(g.data() + (static_cast<std::size_t>(ca) + c) * chunk, chunk,
                b.data() + static_cast<std::size_t>(c) * chunk);
  return {std::move(a), std::move(b)};
}

}  // namespace

// ---------- forward / backward ----------

template <typename T>
Tensor5<T> network_forward(const Network<T>& net, const Tensor5<T>& in,
                           NetCache<T>* cache) {
  net.validate();
  if (in.c() != net.cfg.in_channels)
    throw DomainError("network_forward: input channel mismatch");
  const int L = net.cfg.levels;
  const int div = 1 << (L - 1);
  if (in.y() % div || in.x() % div)
    throw DomainError("network_forward: x and y must divide 2^(levels-1)");

  const std::size_t n_blocks = net.enc.size() + net.dec.size();
  if (cache) {
    cache->input = in;
    cache->bcache.assign(n_blocks, SepConvCache<T>{});
    cache->mask.assign(n_blocks, {});
    cache->zpool.clear();
  }

  Tensor5<T> cur = in;
  std::size_t bi = 0;
  auto run_block = [&](const SepConv4DBlock<T>& blk) {
    SepConvCache<T>* bc = cache ? &cache->bcache[bi] : nullptr;
    cur = sepconv4d_forward(cur, blk, bc);
    relu_inplace(cur, cache ? &cache->mask[bi] : nullptr);
    ++bi;
  };

  std::vector<Tensor5<T>> skips;
  std::vector<bool> zpool;
  for (int l = 0; l < L; ++l) {
    run_block(net.enc[static_cast<std::size_t>(2 * l)]);
    run_block(net.enc[static_cast<std::size_t>(2 * l) + 1]);
    if (l < L - 1) {
      skips.push_back(cur);
      const bool pz = cur.z() >= 4 && cur.z() % 2 == 0;
      zpool.push_back(pz);
      cur = avg_pool(cur, pz);
    }
  }
  for (int l = L - 2; l >= 0; --l) {
    Tensor5<T> up = upsample_nearest(cur, zpool[static_cast<std::size_t>(l)]);
    cur = concat_c(up, skips[static_cast<std::size_t>(l)]);
    const std::size_t di = static_cast<std::size_t>(2 * (L - 2 - l));
    run_block(net.dec[di]);
    run_block(net.dec[di + 1]);
  }
  if (cache) {
    cache->zpool = zpool;
    cache->head_in = cur;
  }
  Tensor5<T> out = conv2d_xy_forward(cur, net.head);
  if (net.cfg.residual) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < out.t(); ++t)
      for (int z = 0; z < out.z(); ++z)
        for (int y = 0; y < out.y(); ++y)
          for (int x = 0; x < out.x(); ++x)
            out.at(0, t, z, y, x) += in.at(0, t, z, y, x);
  }
  return out;
}

template <typename T>
Tensor5<T> network_backward(const Network<T>& net, const Tensor5<T>& gout,
                            const NetCache<T>& cache, Network<T>& grads) {
  net.validate();
  const int L = net.cfg.levels;
  if (cache.bcache.size() != net.enc.size() + net.dec.size())
    throw DomainError("network_backward: cache does not match network");

  Tensor5<T> g = conv2d_xy_backward(gout, cache.head_in, net.head, grads.head);
  std::size_t bi = cache.bcache.size();
  auto back_block = [&](const SepConv4DBlock<T>& blk, SepConv4DBlock<T>& gb) {
    --bi;
    relu_backward(g, cache.mask[bi]);
    g = sepconv4d_backward(g, cache.bcache[bi], blk, gb);
  };

  std::vector<Tensor5<T>> skip_grad(static_cast<std::size_t>(L > 1 ? L - 1 : 0));
  for (int l = 0; l <= L - 2; ++l) {
    const std::size_t di = static_cast<std::size_t>(2 * (L - 2 - l));
    back_block(net.dec[di + 1], grads.dec[di + 1]);
    back_block(net.dec[di], grads.dec[di]);
    auto parts = split_c(g, net.cfg.channels[static_cast<std::size_t>(l) + 1]);
    skip_grad[static_cast<std::size_t>(l)] = std::move(parts.second);
    g = upsample_backward(parts.first, cache.zpool[static_cast<std::size_t>(l)]);
  }
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // Fine extents are those of the skip tensor, recorded in the cache of
      // the block that produced it.
      const Tensor5<T>& ref =
          cache.bcache[static_cast<std::size_t>(2 * l) + 1].x1;
      g = avg_pool_backward(g, ref.z(), ref.y(), ref.x(),
                            cache.zpool[static_cast<std::size_t>(l)]);
      const Tensor5<T>& sg = skip_grad[static_cast<std::size_t>(l)];
      T* gp = g.data();
      const T* sp = sg.data();
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += sp[i];
    }
    back_block(net.enc[static_cast<std::size_t>(2 * l) + 1],
               grads.enc[static_cast<std::size_t>(2 * l) + 1]);
    back_block(net.enc[static_cast<std::size_t>(2 * l)],
               grads.enc[static_cast<std::size_t>(2 * l)]);
  }
  if (net.cfg.residual) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < gout.t(); ++t)
      for (int z = 0; z < gout.z(); ++z)
        for (int y = 0; y < gout.y(); ++y)
          for (int x = 0; x < gout.x(); ++x)
            g.at(0, t, z, y, x) += gout.at(0, t, z, y, x);
  }
  return g;
}

// ---------- parameter registry ----------

namespace {

template <typename T>
void push_block_params(std::vector<ParamRef<T>>& out, const std::string& name,
                       SepConv4DBlock<T>& b) {
  out.push_back({name + ".xy.w", &b.xy.w, {b.xy.cout, b.xy.cin, b.xy.k, b.xy.k}});
  out.push_back({name + ".xy.b", &b.xy.b, {b.xy.cout}});
  out.push_back({name + ".z.w", &b.z.w, {b.z.ch, b.z.ch, 3}});
  out.push_back({name + ".z.b", &b.z.b, {b.z.ch}});
  out.push_back({name + ".t.w", &b.t.w, {b.t.ch, b.t.ch, 3}});
  out.push_back({name + ".t.b", &b.t.b, {b.t.ch}});
}

}  // namespace

template <typename T>
std::vector<ParamRef<T>> param_table(Network<T>& net) {
  std::vector<ParamRef<T>> out;
  const int L = net.cfg.levels;
  for (int l = 0; l < L; ++l)
    for (int s = 0; s < 2; ++s)
      push_block_params(out,
                        "enc" + std::to_string(l) + (s == 0 ? "a" : "b"),
                        net.enc[static_cast<std::size_t>(2 * l + s)]);
  for (int l = L - 2; l >= 0; --l)
    for (int s = 0; s < 2; ++s)
      push_block_params(out,
                        "dec" + std::to_string(l) + (s == 0 ? "a" : "b"),
                        net.dec[static_cast<std::size_t>(2 * (L - 2 - l) + s)]);
  out.push_back({"head.w", &net.head.w, {net.head.cout, net.head.cin, 1, 1}});
  out.push_back({"head.b", &net.head.b, {net.head.cout}});
  return out;
}

template <typename T>
std::size_t count_params(const Network<T>& net) {
  std::size_t n = 0;
  auto add = [&](const SepConv4DBlock<T>& b) {
    n += b.xy.w.size() + b.xy.b.size() + b.z.w.size() + b.z.b.size() +
         b.t.w.size() + b.t.b.size();
  };
  for (const auto& b : net.enc) add(b);
  for (const auto& b : net.dec) add(b);
  n += net.head.w.size() + net.head.b.size();
  return n;
}

template <typename T>
double count_madds_per_slice(const Network<T>& net, int t, int z, int y, int x) {
  net.validate();
  if (t < 1 || z < 1 || y < 1 || x < 1)
    throw DomainError("count_madds_per_slice: bad dims");
  const int L = net.cfg.levels;
  auto block_madds = [](const SepConv4DBlock<T>& b, double vox) {
    double m = vox * b.xy.cout * b.xy.cin * 9.0;
    if (!b.skip_z) m += vox * b.z.ch * b.z.ch * 3.0;
    m += vox * b.t.ch * b.t.ch * 3.0;
    return m;
  };
  double total = 0.0;
  std::vector<std::array<int, 3>> dims;  // (z, y, x) per level
  int cz = z, cy = y, cx = x;
  for (int l = 0; l < L; ++l) {
    dims.push_back({cz, cy, cx});
    const double vox = static_cast<double>(t) * cz * cy * cx;
    total += block_madds(net.enc[static_cast<std::size_t>(2 * l)], vox);
    total += block_madds(net.enc[static_cast<std::size_t>(2 * l) + 1], vox);
    if (l < L - 1) {
      if (cz >= 4 && cz % 2 == 0) cz /= 2;
      cy /= 2;
      cx /= 2;
    }
  }
  for (int l = L - 2; l >= 0; --l) {
    const auto& d = dims[static_cast<std::size_t>(l)];
    const double vox = static_cast<double>(t) * d[0] * d[1] * d[2];
    const std::size_t di = static_cast<std::size_t>(2 * (L - 2 - l));
    total += block_madds(net.dec[di], vox);
    total += block_madds(net.dec[di + 1], vox);
  }
  total += static_cast<double>(t) * z * y * x * net.head.cout * net.head.cin;
  return total / static_cast<double>(z);
}

int z_receptive_half(const NetworkConfig& cfg) {
  cfg.validate();
  const int L = cfg.levels;
  int scale = 1, rf = 0;
  for (int l = 0; l < L; ++l) {
    rf += 2 * scale;
    if (l < L - 1) scale *= 2;
  }
  for (int l = L - 2; l >= 0; --l) {
    scale /= 2;
    rf += 2 * scale;
  }
  return rf;
}

// ---------- volume interface ----------

template <typename T>
Tensor5<T> pack_input(const Volume4D& degraded, const Volume3D& average) {
  const GridSpec& g = degraded.grid();
  if (!(average.grid() == g))
    throw DomainError("pack_input: average grid differs from phase grid");
  const int nt = degraded.phase_count();
  Tensor5<T> in(2, nt, g.nz, g.ny, g.nx);
  for (int it = 0; it < nt; ++it) {
    const float* src = degraded.phase(it).data().data();
    T* dst = &in.at(0, it, 0, 0, 0);
    const std::size_t n = g.voxel_count();
    for (std::size_t i = 0; i < n; ++i)
      dst[i] = static_cast<T>(normalize_hu(src[i]));
    const float* avg = average.data().data();
    T* dsta = &in.at(1, it, 0, 0, 0);
    for (std::size_t i = 0; i < n; ++i)
      dsta[i] = static_cast<T>(normalize_hu(avg[i]));
  }
  return in;
}

template <typename T>
Volume4D unpack_output(const Tensor5<T>& out, const GridSpec& grid) {
  if (out.c() != 1) throw DomainError("unpack_output: expected one channel");
  if (out.z() != grid.nz || out.y() != grid.ny || out.x() != grid.nx)
    throw DomainError("unpack_output: tensor dims differ from grid");
  Volume4D vol(grid, out.t());
  for (int it = 0; it < out.t(); ++it) {
    float* dst = vol.phase(it).data().data();
    const T* src = &out.at(0, it, 0, 0, 0);
    for (std::size_t i = 0; i < grid.voxel_count(); ++i)
      dst[i] = denormalize_hu(static_cast<float>(src[i]));
  }
  return vol;
}

namespace {

Volume3D slice_z(const Volume3D& v, int z0, int z1) {
  GridSpec g = v.grid();
  g.nz = z1 - z0;
  g.origin.z += z0 * g.spacing.z;
  Volume3D out(g);
  const std::size_t plane = static_cast<std::size_t>(g.ny) * g.nx;
  std::copy_n(v.data().begin() + static_cast<std::ptrdiff_t>(z0 * plane),
              static_cast<std::size_t>(z1 - z0) * plane, out.data().begin());
  return out;
}

}  // namespace

template <typename T>
Volume4D infer_volume(const Network<T>& net, const Volume4D& degraded,
                      const Volume3D& average, int z_chunk, int z_margin) {
  const GridSpec& g = degraded.grid();
  if (z_chunk <= 0 || z_chunk >= g.nz) {
    Tensor5<T> in = pack_input<T>(degraded, average);
    return unpack_output(network_forward(net, in), g);
  }
  const int margin = z_margin < 0 ? z_receptive_half(net.cfg) : z_margin;
  const int align = 1 << (net.cfg.levels - 1);
  if (z_chunk % align || g.nz % align)
    throw DomainError("infer_volume: chunk and volume z must align to the pooling grid");
  int step = z_chunk - 2 * margin;
  step -= step % align;
  if (step < align)
    throw DomainError("infer_volume: chunk too small for the stitching margin");

  std::vector<int> starts;
  for (int s = 0;; s = std::min(s + step, g.nz - z_chunk)) {
    starts.push_back(s);
    if (s + z_chunk >= g.nz) break;
  }

  Volume4D out(g, degraded.phase_count());
  const std::size_t plane = static_cast<std::size_t>(g.ny) * g.nx;
  int cursor = 0;
  for (std::size_t ci = 0; ci < starts.size(); ++ci) {
    const int s = starts[ci];
    Volume4D sub;
    for (int p = 0; p < degraded.phase_count(); ++p)
      sub.push_back(slice_z(degraded.phase(p), s, s + z_chunk));
    Volume3D suba = slice_z(average, s, s + z_chunk);
    Tensor5<T> in = pack_input<T>(sub, suba);
    Volume4D rec = unpack_output(network_forward(net, in), sub.grid());
    const int hi =
        ci + 1 == starts.size() ? g.nz : s + z_chunk - margin;
    for (int p = 0; p < out.phase_count(); ++p)
      std::copy_n(rec.phase(p).data().begin() +
                      static_cast<std::ptrdiff_t>((cursor - s) * plane),
                  static_cast<std::size_t>(hi - cursor) * plane,
                  out.phase(p).data().begin() +
                      static_cast<std::ptrdiff_t>(cursor * plane));
    cursor = hi;
  }
  return out;
}

// ---------- loss and optimizer ----------

template <typename T>
std::pair<double, Tensor5<T>> l1_loss(const Tensor5<T>& pred,
                                      const Tensor5<T>& target) {
  if (!pred.same_shape(target)) throw DomainError("l1_loss: shape mismatch");
  Tensor5<T> grad(pred.c(), pred.t(), pred.z(), pred.y(), pred.x());
  const T invn = T(1) / static_cast<T>(pred.size());
  const T* p = pred.data();
  const T* q = target.data();
  T* gp = grad.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T d = p[i] - q[i];
    acc += std::abs(static_cast<double>(d));
    gp[i] = d > T(0) ? invn : (d < T(0) ? -invn : T(0));
  }
  return {acc / static_cast<double>(pred.size()), std::move(grad)};
}

template <typename T>
void adam_init(AdamState<T>& state, const std::vector<ParamRef<T>>& params) {
  state.m.clear();
  state.v.clear();
  state.step = 0;
  for (const auto& p : params) {
    state.m.emplace_back(p.data->size(), T(0));
    state.v.emplace_back(p.data->size(), T(0));
  }
}

template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params,
               const std::vector<ParamRef<T>>& grads, AdamState<T>& state,
               double lr, const AdamHyper& hyper) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DomainError("adam_step: registry sizes disagree");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<T>& p = *params[i].data;
    const std::vector<T>& gv = *grads[i].data;
    if (p.size() != gv.size() || p.size() != state.m[i].size())
      throw DomainError("adam_step: parameter " + params[i].name +
                        " shape mismatch");
    std::vector<T>& m = state.m[i];
    std::vector<T>& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = static_cast<double>(gv[j]);
      const double mj = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * gj;
      const double vj = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      p[j] -= static_cast<T>(lr * (mj / bc1) /
                             (std::sqrt(vj / bc2) + hyper.eps));
    }
  }
}

double learning_rate(int epoch, int total_epochs, double lr_hi, double lr_lo) {
  if (total_epochs < 1 || !(lr_hi > 0.0) || !(lr_lo > 0.0))
    throw DomainError("learning_rate: bad schedule");
  if (total_epochs == 1) return lr_hi;
  double f = static_cast<double>(epoch) / (total_epochs - 1);
  f = std::clamp(f, 0.0, 1.0);
  return std::exp(std::log(lr_hi) + f * (std::log(lr_lo) - std::log(lr_hi)));
}

#define RSTAR_INSTANTIATE_NET(T)                                               \
  template struct Network<T>;                                                  \
  template Network<T> build_network<T>(const NetworkConfig&, Rng&);            \
  template Network<T> zero_like<T>(const Network<T>&);                         \
  template Tensor5<T> network_forward<T>(const Network<T>&, const Tensor5<T>&, \
                                         NetCache<T>*);                        \
  template Tensor5<T> network_backward<T>(const Network<T>&, const Tensor5<T>&, \
                                          const NetCache<T>&, Network<T>&);    \
  template std::vector<ParamRef<T>> param_table<T>(Network<T>&);               \
  template std::size_t count_params<T>(const Network<T>&);                     \
  template double count_madds_per_slice<T>(const Network<T>&, int, int, int,   \
                                           int);                               \
  template Tensor5<T> pack_input<T>(const Volume4D&, const Volume3D&);         \
  template Volume4D unpack_output<T>(const Tensor5<T>&, const GridSpec&);      \
  template Volume4D infer_volume<T>(const Network<T>&, const Volume4D&,        \
                                    const Volume3D&, int, int);                \
  template std::pair<double, Tensor5<T>> l1_loss<T>(const Tensor5<T>&,         \
                                                    const Tensor5<T>&);        \
  template void adam_init<T>(AdamState<T>&, const std::vector<ParamRef<T>>&);  \
  template void adam_step<T>(const std::vector<ParamRef<T>>&,                  \
                             const std::vector<ParamRef<T>>&, AdamState<T>&,   \
                             double, const AdamHyper&);

RSTAR_INSTANTIATE_NET(float)
RSTAR_INSTANTIATE_NET(double)

#undef RSTAR_INSTANTIATE_NET

}  // namespace rstar
