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

#ifndef RSTAR_TENSOR_HPP
#define RSTAR_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "rstar/types.hpp"

namespace rstar {

// Dense 5D tensor indexed (channel, t, z, y, x), x fastest. All dims >= 1.
template <typename T>
class Tensor5 {
 public:
  Tensor5() = default;
  Tensor5(int c, int t, int z, int y, int x)
      : c_(c), t_(t), z_(z), y_(y), x_(x) {
    if (c < 1 || t < 1 || z < 1 || y < 1 || x < 1)
      throw DomainError("Tensor5: all dims must be >= 1");
    data_.assign(static_cast<std::size_t>(c) * t * z * y * x, T(0));
  }

  int c() const { return c_; }
  int t() const { return t_; }
  int z() const { return z_; }
  int y() const { return y_; }
  int x() const { return x_; }

  std::size_t size() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(y_) * x_; }

  std::size_t index(int ic, int it, int iz, int iy, int ix) const {
    return ((((static_cast<std::size_t>(ic) * t_ + it) * z_ + iz) * y_ + iy) *
                x_ +
            ix);
  }
  T& at(int ic, int it, int iz, int iy, int ix) {
    return data_[index(ic, it, iz, iy, ix)];
  }
  const T& at(int ic, int it, int iz, int iy, int ix) const {
    return data_[index(ic, it, iz, iy, ix)];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor5& o) const {
    return c_ == o.c_ && t_ == o.t_ && z_ == o.z_ && y_ == o.y_ && x_ == o.x_;
  }

 private:
  int c_ = 0, t_ = 0, z_ = 0, y_ = 0, x_ = 0;
  std::vector<T> data_;
};

}  // namespace rstar

#endif  // RSTAR_TENSOR_HPP
