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

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "rstar/types.hpp"

namespace rstar {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey; a.size() must be a power of two.  The
// inverse includes the 1/n factor.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Convenience: 2D FFT of a row-major real image (height x width), both
// dimensions padded to powers of two by the caller.
void fft2_inplace(std::vector<std::complex<double>>& img, int height, int width,
                  bool inverse);

}  // namespace rstar
