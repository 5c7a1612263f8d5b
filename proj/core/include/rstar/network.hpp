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

#ifndef RSTAR_NETWORK_HPP
#define RSTAR_NETWORK_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rstar/conv4d.hpp"
#include "rstar/volume.hpp"

namespace rstar {

// U-Net over (t, z, y, x) built from separable 4D blocks. The temporal axis
// is never pooled; z is pooled at a transition only while it is >= 4 and
// even, so decoder shapes mirror the encoder exactly. x and y halve at every
// transition and must be divisible by 2^(levels-1).
struct NetworkConfig {
  int levels = 3;
  std::vector<int> channels = {16, 32, 64};
  int in_channels = 2;
  bool residual = true;
  void validate() const;
};

// Blocks in execution order: enc holds two blocks per level (shallow to
// deep, the last pair is the bottleneck); dec holds two per level from
// levels-2 down to 0. ReLU follows every block; the 1x1 head has none.
template <typename T>
struct Network {
  NetworkConfig cfg;
  std::vector<SepConv4DBlock<T>> enc;
  std::vector<SepConv4DBlock<T>> dec;
  Conv2dXY<T> head;
  void validate() const;
  // Stage-I mode: every block skips its z convolution and freezes its
  // parameters; stage II restores the full model.
  void set_stage1_mode(bool on);
};

template <typename T>
Network<T> build_network(const NetworkConfig& cfg, Rng& rng);

template <typename T>
Network<T> zero_like(const Network<T>& net);

// Activations saved by a cached forward pass, consumed once by backward.
template <typename T>
struct NetCache {
  Tensor5<T> input;
  std::vector<SepConvCache<T>> bcache;            // per block, exec order
  std::vector<std::vector<std::uint8_t>> mask;    // post-ReLU > 0, per block
  std::vector<bool> zpool;                        // per encoder transition
  Tensor5<T> head_in;
};

template <typename T>
Tensor5<T> network_forward(const Network<T>& net, const Tensor5<T>& in,
                           NetCache<T>* cache = nullptr);

// Gradient of a scalar loss wrt the input tensor; parameter gradients are
// accumulated into `grads` (a zero_like clone of the network).
template <typename T>
Tensor5<T> network_backward(const Network<T>& net, const Tensor5<T>& gout,
                            const NetCache<T>& cache, Network<T>& grads);

// Flat registry of every parameter vector in a stable, documented order;
// backs the optimizer and the checkpoint layer table.
template <typename T>
struct ParamRef {
  std::string name;
  std::vector<T>* data = nullptr;
  std::vector<int> shape;
};

template <typename T>
std::vector<ParamRef<T>> param_table(Network<T>& net);

template <typename T>
std::size_t count_params(const Network<T>& net);

// Multiply-adds of one whole-tensor forward pass divided by the z extent:
// the per-axial-slice share for the given input dims.
template <typename T>
double count_madds_per_slice(const Network<T>& net, int t, int z, int y, int x);

// Worst-case half-width of the z receptive field (assumes z pools at every
// transition); the minimum stitching margin for exact chunked inference.
int z_receptive_half(const NetworkConfig& cfg);

// Intensity mapping between HU and the network's [0, 1] domain. The forward
// map clamps, which caps bone at 500 HU; the inverse is exact on [0, 1].
inline float normalize_hu(float hu) {
  const float v = (hu + 1000.0f) / 1500.0f;
  return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
}
inline float denormalize_hu(float v) { return v * 1500.0f - 1000.0f; }

// Two-channel normalized input: channel 0 the degraded phase stack, channel
// 1 the average image broadcast along t.
template <typename T>
Tensor5<T> pack_input(const Volume4D& degraded, const Volume3D& average);

template <typename T>
Volume4D unpack_output(const Tensor5<T>& out, const GridSpec& grid);

// Whole-volume inference; z_chunk > 0 selects the overlap-stitch path with
// margin z_margin (default the receptive-field half-width). Chunk starts
// stay aligned to the pooling grid so stitched interiors match the one-pass
// result exactly.
template <typename T>
Volume4D infer_volume(const Network<T>& net, const Volume4D& degraded,
                      const Volume3D& average, int z_chunk = 0,
                      int z_margin = -1);

// Mean absolute error and its subgradient (sign with sign(0) = 0).
template <typename T>
std::pair<double, Tensor5<T>> l1_loss(const Tensor5<T>& pred,
                                      const Tensor5<T>& target);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  std::int64_t step = 0;
};

template <typename T>
void adam_init(AdamState<T>& state, const std::vector<ParamRef<T>>& params);

template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params,
               const std::vector<ParamRef<T>>& grads, AdamState<T>& state,
               double lr, const AdamHyper& hyper = {});

// Log-linear decay from lr_hi (epoch 0) to lr_lo (last epoch).
double learning_rate(int epoch, int total_epochs, double lr_hi, double lr_lo);

}  // namespace rstar

#endif  // RSTAR_NETWORK_HPP
