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

#ifndef RSTAR_TRAIN_HPP
#define RSTAR_TRAIN_HPP

#include <array>
#include <filesystem>
#include <vector>

#include "rstar/checkpoint.hpp"
#include "rstar/network.hpp"

namespace rstar {

// One training example: per-phase degraded volumes, the average image, and
// per-phase ground-truth targets, all RSV1 paths.
struct TrainCase {
  std::vector<std::filesystem::path> degraded;
  std::filesystem::path average;
  std::vector<std::filesystem::path> target;
};

struct DatasetManifest {
  std::vector<TrainCase> train;
  std::vector<TrainCase> validation;
};

// JSON manifest:
//   {"schema": 1,
//    "train": [{"degraded": [...], "average": "...", "target": [...]}, ...],
//    "validation": [...]}
// Paths resolve relative to the manifest's directory; unknown keys are
// rejected by name.
DatasetManifest load_manifest(const std::filesystem::path& path);

struct LoadedCase {
  Volume4D degraded;
  Volume3D average;
  Volume4D target;
};

LoadedCase load_case(const TrainCase& c);

struct TrainConfig {
  NetworkConfig net;
  int stage1_epochs = 4;
  int stage2_epochs = 8;
  double lr_hi = 1e-4;
  double lr_lo = 1e-5;
  AdamHyper adam;
  // Stage-II crop shapes as (x, y, z); the temporal extent is always the
  // full phase count.
  std::array<std::array<int, 3>, 3> stage2_blocks{
      {{64, 64, 8}, {48, 48, 16}, {32, 32, 32}}};
  int crops_per_case = 3;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::filesystem::path resume_from;  // empty: start fresh
  void validate() const;
};

struct EpochLog {
  int stage = 0;
  int epoch = 0;
  double loss = 0.0;
  double val_ssim = 0.0;
};

struct TrainOutput {
  std::filesystem::path final_checkpoint;
  std::vector<EpochLog> log;
};

// Stage-I dataset: one (x, y, t) sample per axial slice of every training
// case, so the sample count is the summed z extent.
struct SliceSample {
  int case_idx = 0;
  int iz = 0;
};
std::vector<SliceSample> stage1_samples(const std::vector<LoadedCase>& cases);

struct CropSpec {
  int case_idx = 0;
  int x0 = 0, y0 = 0, z0 = 0;
  int nx = 0, ny = 0, nz = 0;
};

// Seeded uniform crop offsets; rejects shapes that do not fit the volume or
// are too small for the network's pooled footprint.
CropSpec draw_crop(Rng& rng, int case_idx, const GridSpec& grid,
                   const std::array<int, 3>& shape, int levels);

// Normalized tensors for a whole case (input 2 channels, target 1).
Tensor5<float> pack_case_input(const LoadedCase& c);
Tensor5<float> pack_case_target(const LoadedCase& c);
Tensor5<float> crop_tensor(const Tensor5<float>& t, const CropSpec& s);
Tensor5<float> slice_tensor(const Tensor5<float>& t, int iz);

// One optimization step (batch 1): cached forward, L1 loss, full backward,
// Adam update. Returns the loss.
double train_step(Network<float>& net, Network<float>& grads,
                  const std::vector<ParamRef<float>>& params,
                  const std::vector<ParamRef<float>>& grad_refs,
                  AdamState<float>& optim, const Tensor5<float>& in,
                  const Tensor5<float>& target, double lr,
                  const AdamHyper& hyper);

// Mean lung-ROI SSIM of whole-volume inference against the targets over all
// validation cases and phases; falls back to a global mask when no lung is
// found in a target phase.
double validation_lung_ssim(const Network<float>& net,
                            const std::vector<LoadedCase>& val);

// The two-stage schedule: stage I on axial slices with the z convolution
// skipped and frozen, stage II on mixed-size 4D crops with the full model.
// Shuffles are reseeded per epoch from (seed, stage, epoch), and the
// optimizer state rides along in every checkpoint, so resuming from an
// epoch-boundary checkpoint is bit-consistent with an uninterrupted run.
TrainOutput run_training(const TrainConfig& cfg, const DatasetManifest& manifest);

}  // namespace rstar

#endif  // RSTAR_TRAIN_HPP
