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

#ifndef RSTAR_CONV4D_HPP
#define RSTAR_CONV4D_HPP

#include <cstddef>
#include <vector>

#include "rstar/rng.hpp"
#include "rstar/tensor.hpp"

namespace rstar {

// 2D convolution over (y, x), zero "same" padding, kernel k in {1, 3}.
// Weights laid out (c_out, c_in, ky, kx); one bias per output channel.
template <typename T>
struct Conv2dXY {
  int cout = 0;
  int cin = 0;
  int k = 3;
  std::vector<T> w;
  std::vector<T> b;
  void validate() const;
};

// 1D channel-mixing convolution along z or t, kernel 3. The padding scheme
// (zero for z, circular for t) is chosen by the forward routine, not stored
// here. Weights laid out (c_out, c_in, kt).
template <typename T>
struct Conv1d {
  int ch = 0;
  std::vector<T> w;
  std::vector<T> b;
  void validate() const;
};

// Factorized 4D convolution: x-y (C_in -> C_out), then z, then t (both
// C_out -> C_out). No nonlinearity inside the block. skip_z bypasses the z
// sub-convolution entirely; frozen_z additionally suppresses its gradients.
template <typename T>
struct SepConv4DBlock {
  Conv2dXY<T> xy;
  Conv1d<T> z;
  Conv1d<T> t;
  bool skip_z = false;
  bool frozen_z = false;
  int cin() const { return xy.cin; }
  int cout() const { return xy.cout; }
  void validate() const;
};

// Dense 3x3x3x3 convolution over (t, z, y, x), circular padding along t and
// zero padding elsewhere. Weights laid out (c_out, c_in, kt, kz, ky, kx).
template <typename T>
struct Iso4DConvBlock {
  int cout = 0;
  int cin = 0;
  std::vector<T> w;
  std::vector<T> b;
  void validate() const;
};

// Saved activations for a block's backward pass: the block input, the x-y
// output, and the z output (unused when skip_z).
template <typename T>
struct SepConvCache {
  Tensor5<T> x0, x1, x2;
};

template <typename T>
Conv2dXY<T> make_conv2d(int cin, int cout, int k = 3);
template <typename T>
Conv1d<T> make_conv1d(int ch);
template <typename T>
SepConv4DBlock<T> make_sepconv4d(int cin, int cout);
template <typename T>
Iso4DConvBlock<T> make_iso4d(int cin, int cout);

// Zero-filled parameter clones; gradients are accumulated into these.
template <typename T>
SepConv4DBlock<T> zero_like(const SepConv4DBlock<T>& blk);
template <typename T>
Conv2dXY<T> zero_like(const Conv2dXY<T>& c);

// He-uniform weight init, bounds +-sqrt(6 / fan_in); biases start at zero.
template <typename T>
void he_uniform_init(Conv2dXY<T>& c, Rng& rng);
template <typename T>
void he_uniform_init(Conv1d<T>& c, Rng& rng);
template <typename T>
void he_uniform_init(SepConv4DBlock<T>& blk, Rng& rng);

template <typename T>
Tensor5<T> conv2d_xy_forward(const Tensor5<T>& in, const Conv2dXY<T>& c);
template <typename T>
Tensor5<T> conv1d_z_forward(const Tensor5<T>& in, const Conv1d<T>& c);
template <typename T>
Tensor5<T> conv1d_t_forward(const Tensor5<T>& in, const Conv1d<T>& c);

// grad_in for each sub-convolution plus accumulation of parameter gradients.
template <typename T>
Tensor5<T> conv2d_xy_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                              const Conv2dXY<T>& c, Conv2dXY<T>& grads);
template <typename T>
Tensor5<T> conv1d_z_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                             const Conv1d<T>& c, Conv1d<T>& grads);
template <typename T>
Tensor5<T> conv1d_t_backward(const Tensor5<T>& gout, const Tensor5<T>& in,
                             const Conv1d<T>& c, Conv1d<T>& grads);

// Sequential x-y -> z -> t application. When cache is non-null the
// activations needed by the backward pass are stored there.
template <typename T>
Tensor5<T> sepconv4d_forward(const Tensor5<T>& in, const SepConv4DBlock<T>& blk,
                             SepConvCache<T>* cache = nullptr);

// Exact reverse-mode gradients through the block. Parameter gradients are
// accumulated into `grads` (shaped like the block); frozen_z leaves the z
// sub-convolution's entries untouched.
template <typename T>
Tensor5<T> sepconv4d_backward(const Tensor5<T>& gout,
                              const SepConvCache<T>& cache,
                              const SepConv4DBlock<T>& blk,
                              SepConv4DBlock<T>& grads);

template <typename T>
Tensor5<T> iso4dconv_forward(const Tensor5<T>& in, const Iso4DConvBlock<T>& blk);

// The dense 4D kernel a separable block realizes: contraction of w_t, w_z,
// and w_xy over the intermediate channel indices (a plain outer product when
// C = 1). Requires zero x-y and z biases, which make the equivalence exact
// everywhere including padded borders; skip_z contributes an identity tap.
template <typename T>
Iso4DConvBlock<T> compose_kernel(const SepConv4DBlock<T>& blk);

// Weight counts exclude biases. The separable block counts all three factor
// kernels regardless of the runtime skip flag.
template <typename T>
std::size_t weight_count(const Conv2dXY<T>& c);
template <typename T>
std::size_t weight_count(const SepConv4DBlock<T>& blk);
template <typename T>
std::size_t weight_count(const Iso4DConvBlock<T>& blk);

}  // namespace rstar

#endif  // RSTAR_CONV4D_HPP
