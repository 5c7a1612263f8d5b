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

#ifndef RSTAR_CONFIG_HPP
#define RSTAR_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "rstar/metrics.hpp"
#include "rstar/recon.hpp"
#include "rstar/respiration.hpp"
#include "rstar/rsa.hpp"
#include "rstar/scanner.hpp"
#include "rstar/train.hpp"

namespace rstar {

// Whole-run configuration, loaded from one JSON file.  Every tunable
// constant of the pipeline is a key with the default below; unknown keys are
// rejected by name, and all paths inside the file resolve relative to the
// file's directory.  A single top-level seed drives every random choice.

struct PhantomSection {
  std::uint64_t variant = 0;  // 0: canonical thorax; else seeded variation
  // The phantom grid is taller than the reconstruction grid on purpose: with
  // the default detector every ray that reaches a row passes through |z| up
  // to ~110 mm inside the body, and the sampled anatomy must cover that or
  // the projections pick up artificial truncation edges no scanner would see.
  int nx = 128, ny = 128, nz = 96;
  Vec3 spacing{3.125, 3.125, 2.5};  // mm
  int n_phases = 10;
  MotionSampling sampling = MotionSampling::PhaseLocked;

  GridSpec grid() const { return GridSpec::centered(nx, ny, nz, spacing); }
};

struct SignalSection {
  double mean_period_s = 4.0;
  double period_jitter = 0.05;  // fractional sigma per cycle
  double peak_jitter = 0.05;    // fractional sigma per cycle
  double sample_rate_hz = 20.0;

  BreathingParams params(double duration_s, std::uint64_t seed) const {
    BreathingParams p;
    p.mean_period = mean_period_s;
    p.period_jitter = period_jitter;
    p.peak_jitter = peak_jitter;
    p.duration = duration_s;
    p.seed = seed;
    return p;
  }
};

struct ReconSection {
  int nx = 128, ny = 128, nz = 64;
  // The 2.5 mm axial pitch keeps the 160 mm extent inside the cone of the
  // default detector for every voxel the body can occupy.
  Vec3 spacing{3.125, 3.125, 2.5};  // mm
  RampFilter filter = RampFilter::RamLak;

  GridSpec grid() const { return GridSpec::centered(nx, ny, nz, spacing); }
};

struct RsaSection {
  int slice_z = -1;  // axial slice for streak analysis; -1: center slice
  int shroud_max_shift = 16;
  double gap_threshold_deg = 20.0;  // angular-cluster break
  double streak_min_radius = 6.0;   // px in the padded spectrum
  double streak_max_radius = 0.0;   // 0: Nyquist ring
  LKOptions flow;
  int trajectory_stride = 4;
  int kmeans_iterations = 50;
};

struct EvaluationSection {
  SsimOptions ssim;
  double tumor_margin_mm = 0.0;
};

// Canonical desk-scale scan: the stock geometry with a half-fan detector
// shift of a quarter detector width.
inline ScanGeometry default_scan_geometry() {
  ScanGeometry g;
  g.offset_u = 0.25 * g.det_width;
  return g;
}

struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 0;  // 0: all available cores
  PhantomSection phantom;
  SignalSection signal;
  ScanGeometry geometry = default_scan_geometry();
  ReconSection recon;
  RsaSection rsa;
  NetworkConfig network;
  TrainConfig training;  // out_dir/resume_from come from the command line
  EvaluationSection evaluation;

  void validate() const;
};

// Parse and validate a config file.  Missing keys take the documented
// defaults; unknown keys raise ConfigError naming the key and section.
RunConfig load_config(const std::filesystem::path& path);

// The built-in defaults as a JSON string (pretty-printed), for `--dump-config`.
std::string default_config_json();

}  // namespace rstar

#endif  // RSTAR_CONFIG_HPP
