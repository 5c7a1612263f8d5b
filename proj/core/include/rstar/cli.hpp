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

#ifndef RSTAR_CLI_HPP
#define RSTAR_CLI_HPP

#include <filesystem>
#include <string>

#include "rstar/config.hpp"
#include "rstar/train.hpp"

namespace rstar {

// The command implementations behind the `rstar` binary, callable directly
// from tests.  Every command is deterministic for a fixed config and seed:
// rerunning one produces byte-identical files.

// Breathing scan of the configured phantom: writes scan.rsp, signal.csv, and
// the analytic ground truth truth_phaseNN.rsv sampled on the reconstruction
// grid at the per-phase mean amplitudes.
void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);

// Average FDK (f_ave.rsv) plus phase-gated FDK (f_phaseNN.rsv), in HU.
void cmd_reconstruct(const RunConfig& cfg,
                     const std::filesystem::path& projections,
                     const std::filesystem::path& out_dir);

// Streak-artifact analysis of a reconstruction directory: per-phase angular
// sampling and streak orientation (sampling.csv, orientation.csv, streak
// preview PGMs), the Amsterdam shroud and its breathing surrogate
// (shroud.pgm, surrogate.csv), trajectory tracking through cyclic optical
// flow (trajectories.csv, axis_stats.csv, clusters.csv), and a summary.csv
// of scalar results.  `signal_csv` may be empty; when given, the surrogate
// is correlated against it.
void cmd_analyze_rsa(const RunConfig& cfg,
                     const std::filesystem::path& recon_dir,
                     const std::filesystem::path& projections,
                     const std::filesystem::path& signal_csv,
                     const std::filesystem::path& out_dir);

// Two-stage training from a dataset manifest; `resume` may be empty.
TrainOutput cmd_train(const RunConfig& cfg, const std::filesystem::path& manifest,
                      const std::filesystem::path& out_dir,
                      const std::filesystem::path& resume);

// Restoration of a reconstruction directory with a trained checkpoint;
// writes recovered_phaseNN.rsv.  z_chunk 0 runs one pass; positive values
// select the overlap-stitch path with that chunk depth.
void cmd_infer(const RunConfig& cfg, const std::filesystem::path& checkpoint,
               const std::filesystem::path& recon_dir,
               const std::filesystem::path& out_dir, int z_chunk);

// Volume-domain metrics (against truth_dir) and projection-domain metrics
// (against a measured scan); either reference may be empty, at least one is
// required.  Writes volume_metrics.csv / volume_summary.csv /
// projection_metrics.csv.
void cmd_evaluate(const RunConfig& cfg,
                  const std::filesystem::path& recovered_dir,
                  const std::filesystem::path& truth_dir,
                  const std::filesystem::path& projections,
                  const std::filesystem::path& out_dir);

// Simulate + reconstruct a family of phantom variants and write a training
// manifest (caseNN/ directories with f_*, truth_*; manifest.json).
void cmd_dataset(const RunConfig& cfg, int train_cases, int val_cases,
                 const std::filesystem::path& out_dir);

// "stem_phaseNN.rsv"
std::string phase_file_name(const std::string& stem, int phase);

struct ReconDir {
  Volume4D phases;
  Volume3D average;
};

// Load f_ave.rsv + f_phaseNN.rsv from a reconstruction directory.
ReconDir read_recon_dir(const std::filesystem::path& dir);

// Load a phase series with the given stem; throws IoError when phase 0 is
// missing.
Volume4D read_phase_set(const std::filesystem::path& dir, const std::string& stem);

// Argument parsing and dispatch for the single binary.  Exit codes: 0
// success, 2 config/usage, 3 I/O, 4 domain, 5 integrity, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace rstar

#endif  // RSTAR_CLI_HPP
