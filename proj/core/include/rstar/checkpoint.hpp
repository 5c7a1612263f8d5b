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

#ifndef RSTAR_CHECKPOINT_HPP
#define RSTAR_CHECKPOINT_HPP

#include <filesystem>

#include "rstar/network.hpp"

namespace rstar {

// Position inside the two-stage training schedule: `stage` 0 before any
// training, else 1 or 2; `epoch` counts completed epochs within the stage;
// `step` mirrors the optimizer's global step count.
struct TrainCursor {
  std::int32_t stage = 0;
  std::int32_t epoch = 0;
  std::int64_t step = 0;
};

// RSC1 container (little-endian):
//   "RSC1" | u32 version=1 | u32 flags (bit 0: optimizer blob)
//   i32 stage | i32 epoch | i64 step
//   u32 levels | u32 in_channels | u8 residual | u32 channels[levels]
//   u32 n_entries
//   per entry: u16 name_len | name | u8 ndims | i32 dims[ndims] | u64 byte_offset
//   u64 value_count | f32 values[value_count]
//   optimizer blob when flagged: f32 m[value_count] | f32 v[value_count]
// Entries appear in parameter-table order with contiguous offsets, so a
// save -> load -> save round trip is byte-identical.
void save_checkpoint(const std::filesystem::path& path, Network<float>& net,
                     const TrainCursor& cursor,
                     const AdamState<float>* optim = nullptr);

struct Checkpoint {
  Network<float> net;
  TrainCursor cursor;
  bool has_optim = false;
  AdamState<float> optim;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rstar

#endif  // RSTAR_CHECKPOINT_HPP
