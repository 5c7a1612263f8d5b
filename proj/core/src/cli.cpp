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

#include "rstar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "rstar/checkpoint.hpp"
#include "rstar/io.hpp"
#include "rstar/metrics.hpp"
#include "rstar/phantom.hpp"
#include "rstar/recon.hpp"
#include "rstar/respiration.hpp"
#include "rstar/rsa.hpp"
#include "rstar/scanner.hpp"

namespace rstar {

namespace {

constexpr double kDeg = 180.0 / kPi;

Phantom4D config_phantom(const RunConfig& cfg) {
  Phantom4D ph = cfg.phantom.variant == 0 ? thorax_v1()
                                          : thorax_variant(cfg.phantom.variant);
  ph.validate();
  return ph;
}

BreathingSignal config_signal(const RunConfig& cfg) {
  return synthesize_breathing(cfg.signal.params(cfg.geometry.rotation_time,
                                                derive_seed(cfg.seed, "breathing")));
}

void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string());
}

std::string fmt(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.9g", v);
  return b;
}

// CSV with string cells (the numeric writer lives in io); numbers still use
// %.9g so reruns are byte-identical.
void write_text_csv(const std::filesystem::path& path,
                    const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  for (const auto& l : lines) out << l << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

double pearson_vec(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw DomainError("pearson: length mismatch or empty");
  }
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Clamped linear interpolation of a sampled waveform.
double interp_signal(const std::vector<SignalSample>& s, double t) {
  if (s.empty()) throw DomainError("interp_signal: empty series");
  if (t <= s.front().time) return s.front().amplitude;
  if (t >= s.back().time) return s.back().amplitude;
  const auto it = std::upper_bound(
      s.begin(), s.end(), t,
      [](double v, const SignalSample& x) { return v < x.time; });
  const SignalSample& hi = *it;
  const SignalSample& lo = *(it - 1);
  const double f = (t - lo.time) / (hi.time - lo.time);
  return lo.amplitude + f * (hi.amplitude - lo.amplitude);
}

Volume4D read_phase_set_any(const std::filesystem::path& dir,
                            std::initializer_list<const char*> stems) {
  for (const char* stem : stems) {
    if (std::filesystem::exists(dir / phase_file_name(stem, 0))) {
      return read_phase_set(dir, stem);
    }
  }
  throw IoError("no phase volume series found in " + dir.string());
}

}  // namespace

std::string phase_file_name(const std::string& stem, int phase) {
  char b[32];
  std::snprintf(b, sizeof b, "_phase%02d.rsv", phase);
  return stem + b;
}

Volume4D read_phase_set(const std::filesystem::path& dir, const std::string& stem) {
  Volume4D out;
  for (int p = 0;; ++p) {
    const auto path = dir / phase_file_name(stem, p);
    if (!std::filesystem::exists(path)) break;
    out.push_back(read_volume(path));
  }
  if (out.phase_count() == 0) {
    throw IoError("no " + stem + "_phase volumes in " + dir.string());
  }
  return out;
}

ReconDir read_recon_dir(const std::filesystem::path& dir) {
  ReconDir rd;
  rd.phases = read_phase_set(dir, "f");
  rd.average = read_volume(dir / "f_ave.rsv");
  if (!(rd.average.grid() == rd.phases.grid())) {
    throw DomainError("recon dir: average and phase grids differ");
  }
  return rd;
}

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const Phantom4D ph = config_phantom(cfg);
  const BreathingSignal sig = config_signal(cfg);
  const ProjectionSet proj =
      simulate_4d_scan(ph, sig, cfg.geometry, cfg.phantom.grid(),
                       cfg.phantom.n_phases, cfg.phantom.sampling);
  write_projections(out_dir / "scan.rsp", proj);
  write_signal_csv(out_dir / "signal.csv",
                   sample_breathing(sig, cfg.signal.sample_rate_hz));
  const Volume4D truth =
      ph.sample_phases(cfg.recon.grid(),
                       phase_mean_amplitudes(cfg.phantom.n_phases));
  for (int p = 0; p < truth.phase_count(); ++p) {
    write_volume(out_dir / phase_file_name("truth", p), truth.phase(p));
  }
}

void cmd_reconstruct(const RunConfig& cfg,
                     const std::filesystem::path& projections,
                     const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const ProjectionSet proj = read_projections(projections);
  const GridSpec grid = cfg.recon.grid();
  write_volume(out_dir / "f_ave.rsv",
               volume_mu_to_hu(fdk(proj, grid, cfg.recon.filter)));
  const Volume4D phases =
      gated_fdk(proj, grid, cfg.phantom.n_phases, cfg.recon.filter);
  for (int p = 0; p < phases.phase_count(); ++p) {
    write_volume(out_dir / phase_file_name("f", p),
                 volume_mu_to_hu(phases.phase(p)));
  }
}

void cmd_analyze_rsa(const RunConfig& cfg,
                     const std::filesystem::path& recon_dir,
                     const std::filesystem::path& projections,
                     const std::filesystem::path& signal_csv,
                     const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const ReconDir rd = read_recon_dir(recon_dir);
  const GridSpec grid = rd.phases.grid();
  const int n = rd.phases.phase_count();
  const ProjectionSet proj = read_projections(projections);

  // Angular sampling per phase.
  const auto patterns = sampling_patterns(proj, n);
  const double gap_thresh = cfg.rsa.gap_threshold_deg / kDeg;
  {
    std::vector<std::vector<double>> rows;
    for (int p = 0; p < n; ++p) {
      const auto& ps = patterns[static_cast<std::size_t>(p)];
      rows.push_back({static_cast<double>(p),
                      static_cast<double>(ps.angles.size()), ps.max_gap * kDeg,
                      ps.gap_orientation * kDeg, ps.gap_resultant,
                      static_cast<double>(
                          count_angle_clusters(ps.angles, gap_thresh))});
    }
    write_csv(out_dir / "sampling.csv",
              "phase,n_views,max_gap_deg,gap_orientation_deg,gap_resultant,"
              "n_clusters",
              rows);
  }

  // Streak orientation of each phase against the average image, on one
  // axial slice.
  const int iz = cfg.rsa.slice_z < 0 ? grid.nz / 2 : cfg.rsa.slice_z;
  if (iz >= grid.nz) throw ConfigError("analyze-rsa: slice_z out of range");
  const auto ref = axial_slice(rd.average, iz);
  std::vector<double> streaks, preds;
  {
    std::vector<std::vector<double>> rows;
    for (int p = 0; p < n; ++p) {
      const auto slice = axial_slice(rd.phases.phase(p), iz);
      const StreakOrientation so = streak_orientation(
          slice, ref, grid.nx, grid.ny, cfg.rsa.streak_min_radius,
          cfg.rsa.streak_max_radius);
      // Views cluster a quarter turn from the gap centres, and streaks run
      // along the sampled ray directions.
      const double pred =
          std::fmod(patterns[static_cast<std::size_t>(p)].gap_orientation +
                        0.5 * kPi,
                    kPi);
      streaks.push_back(so.orientation);
      preds.push_back(pred);
      rows.push_back({static_cast<double>(p), so.orientation * kDeg, pred * kDeg});

      std::vector<float> diff(slice.size());
      for (std::size_t i = 0; i < slice.size(); ++i) diff[i] = slice[i] - ref[i];
      char pgm[32];
      std::snprintf(pgm, sizeof pgm, "streak_phase%02d.pgm", p);
      write_pgm16(out_dir / pgm, grid.nx, grid.ny,
                  window_to_u16(diff, -300.0, 300.0));
    }
    write_csv(out_dir / "orientation.csv", "phase,streak_deg,predicted_deg", rows);
  }
  const double streak_corr = circular_correlation(streaks, preds);

  // Amsterdam shroud and breathing surrogate.
  const ShroudImage shroud = amsterdam_shroud(proj);
  const auto [mn, mx] =
      std::minmax_element(shroud.data.begin(), shroud.data.end());
  write_pgm16(out_dir / "shroud.pgm", shroud.width, shroud.height,
              window_to_u16(shroud.data, *mn, *mx));
  const auto surrogate = shroud_surrogate(shroud, cfg.rsa.shroud_max_shift);
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < surrogate.size(); ++j) {
      rows.push_back({static_cast<double>(j), proj.view(j).time, surrogate[j]});
    }
    write_csv(out_dir / "surrogate.csv", "view,time_s,surrogate", rows);
  }
  double shroud_pearson = std::numeric_limits<double>::quiet_NaN();
  if (!signal_csv.empty()) {
    const auto samples = read_signal_csv(signal_csv);
    std::vector<double> truth;
    truth.reserve(surrogate.size());
    for (std::size_t j = 0; j < surrogate.size(); ++j) {
      truth.push_back(interp_signal(samples, proj.view(j).time));
    }
    shroud_pearson = pearson_vec(surrogate, truth);
  }

  // Trajectories through the cyclic flow chain.
  std::vector<FlowField3D> flows;
  flows.reserve(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    flows.push_back(lucas_kanade_3d(rd.phases.phase(p),
                                    rd.phases.phase((p + 1) % n), cfg.rsa.flow));
  }
  const Mask body = body_mask(rd.average);
  const auto trajs = track_trajectories(flows, body, grid.nx, grid.ny, grid.nz,
                                        cfg.rsa.trajectory_stride);
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t id = 0; id < trajs.size(); ++id) {
      const auto& tr = trajs[id];
      for (std::size_t k = 0; k < tr.displacements.size(); ++k) {
        rows.push_back({static_cast<double>(id), tr.truncated ? 1.0 : 0.0,
                        tr.seed.x, tr.seed.y, tr.seed.z,
                        static_cast<double>(k), tr.displacements[k].x,
                        tr.displacements[k].y, tr.displacements[k].z});
      }
    }
    write_csv(out_dir / "trajectories.csv",
              "trajectory,truncated,seed_x,seed_y,seed_z,step,dx,dy,dz", rows);
  }
  const AxisStats stats = axis_flow_stats(trajs);
  std::size_t n_complete = 0;
  for (const auto& tr : trajs) {
    if (!tr.truncated) ++n_complete;
  }
  write_csv(out_dir / "axis_stats.csv",
            "mean_abs_dx,mean_abs_dy,mean_abs_dz,steps,n_complete,n_truncated",
            {{stats.mean_abs_dx, stats.mean_abs_dy, stats.mean_abs_dz,
              static_cast<double>(stats.steps), static_cast<double>(n_complete),
              static_cast<double>(trajs.size() - n_complete)}});

  const auto features = trajectory_features(trajs);
  const auto labels = kmeans2(features, cfg.rsa.kmeans_iterations);
  {
    std::vector<std::vector<double>> rows;
    std::size_t fi = 0;
    std::size_t counts[2] = {0, 0};
    for (std::size_t id = 0; id < trajs.size(); ++id) {
      if (trajs[id].truncated) continue;
      const int lab = labels[fi++];
      ++counts[lab];
      rows.push_back({static_cast<double>(id), static_cast<double>(lab)});
    }
    write_csv(out_dir / "clusters.csv", "trajectory,cluster", rows);

    const double inplane = 0.5 * (stats.mean_abs_dx + stats.mean_abs_dy);
    write_text_csv(
        out_dir / "summary.csv",
        {"metric,value",
         "streak_gap_correlation," + fmt(streak_corr),
         "shroud_signal_pearson," + fmt(shroud_pearson),
         "axis_ratio_z_over_inplane," +
             fmt(inplane > 0.0 ? stats.mean_abs_dz / inplane
                               : std::numeric_limits<double>::quiet_NaN()),
         "n_trajectories," + fmt(static_cast<double>(trajs.size())),
         "n_complete," + fmt(static_cast<double>(n_complete)),
         "cluster0_count," + fmt(static_cast<double>(counts[0])),
         "cluster1_count," + fmt(static_cast<double>(counts[1]))});
  }
}

TrainOutput cmd_train(const RunConfig& cfg, const std::filesystem::path& manifest,
                      const std::filesystem::path& out_dir,
                      const std::filesystem::path& resume) {
  TrainConfig t = cfg.training;
  t.out_dir = out_dir;
  t.resume_from = resume;
  t.validate();
  const DatasetManifest m = load_manifest(manifest);
  const TrainOutput out = run_training(t, m);
  std::printf("final checkpoint: %s\n", out.final_checkpoint.string().c_str());
  return out;
}

void cmd_infer(const RunConfig& cfg, const std::filesystem::path& checkpoint,
               const std::filesystem::path& recon_dir,
               const std::filesystem::path& out_dir, int z_chunk) {
  (void)cfg;
  ensure_dir(out_dir);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const ReconDir rd = read_recon_dir(recon_dir);
  const Volume4D rec = infer_volume(ck.net, rd.phases, rd.average, z_chunk);
  for (int p = 0; p < rec.phase_count(); ++p) {
    write_volume(out_dir / phase_file_name("recovered", p), rec.phase(p));
  }
}

void cmd_evaluate(const RunConfig& cfg,
                  const std::filesystem::path& recovered_dir,
                  const std::filesystem::path& truth_dir,
                  const std::filesystem::path& projections,
                  const std::filesystem::path& out_dir) {
  if (truth_dir.empty() && projections.empty()) {
    throw ConfigError("evaluate: need --truth and/or --projections");
  }
  ensure_dir(out_dir);
  const Volume4D rec =
      read_phase_set_any(recovered_dir, {"recovered", "f", "truth"});

  if (!truth_dir.empty()) {
    const Volume4D truth =
        read_phase_set_any(truth_dir, {"truth", "f", "recovered"});
    if (!(truth.grid() == rec.grid()) ||
        truth.phase_count() != rec.phase_count()) {
      throw DomainError("evaluate: recovered and truth sets do not match");
    }
    const Phantom4D ph = config_phantom(cfg);
    const int n = rec.phase_count();
    const char* region_names[4] = {"global", "body", "lung", "tumor"};
    double sums[4][3] = {};
    int counts[4] = {};
    int ncc_counts[4] = {};
    std::vector<std::string> lines = {"phase,region,voxels,ssim,rmse_hu,ncc"};
    for (int p = 0; p < n; ++p) {
      const Volume3D& t = truth.phase(p);
      const Volume3D& r = rec.phase(p);
      const Mask masks[4] = {
          mask_all(t.grid()), body_mask(t), lung_mask(t),
          tumor_mask(ph, t.grid(), phase_mean_amplitude(p, n),
                     cfg.evaluation.tumor_margin_mm)};
      for (int m = 0; m < 4; ++m) {
        const std::size_t vox = mask_count(masks[m]);
        double s = std::numeric_limits<double>::quiet_NaN();
        double e = std::numeric_limits<double>::quiet_NaN();
        double c = std::numeric_limits<double>::quiet_NaN();
        if (vox > 0) {
          s = ssim3d(r, t, masks[m], cfg.evaluation.ssim);
          e = rmse(r, t, masks[m]);
          // Piecewise-constant ground truth can be exactly constant over a
          // region (uniform lung interior); correlation is undefined there
          // and reported as nan rather than aborting the evaluation.
          try {
            c = pearson_ncc(r, t, masks[m]);
          } catch (const DomainError&) {
          }
          sums[m][0] += s;
          sums[m][1] += e;
          ++counts[m];
          if (std::isfinite(c)) {
            sums[m][2] += c;
            ++ncc_counts[m];
          }
        }
        lines.push_back(fmt(p) + "," + region_names[m] + "," +
                        fmt(static_cast<double>(vox)) + "," + fmt(s) + "," +
                        fmt(e) + "," + fmt(c));
      }
    }
    write_text_csv(out_dir / "volume_metrics.csv", lines);

    std::vector<std::string> sum_lines = {"region,mean_ssim,mean_rmse_hu,mean_ncc"};
    for (int m = 0; m < 4; ++m) {
      const double k = counts[m] > 0 ? static_cast<double>(counts[m])
                                     : std::numeric_limits<double>::quiet_NaN();
      const double kn = ncc_counts[m] > 0 ? static_cast<double>(ncc_counts[m])
                                          : std::numeric_limits<double>::quiet_NaN();
      sum_lines.push_back(std::string(region_names[m]) + "," +
                          fmt(sums[m][0] / k) + "," + fmt(sums[m][1] / k) + "," +
                          fmt(sums[m][2] / kn));
    }
    write_text_csv(out_dir / "volume_summary.csv", sum_lines);
  }

  if (!projections.empty()) {
    const ProjectionSet meas = read_projections(projections);
    const auto scores = projection_domain_eval(rec, meas);
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      rows.push_back({static_cast<double>(j),
                      static_cast<double>(meas.view(j).phase), scores[j].ssim,
                      scores[j].ncc});
    }
    write_csv(out_dir / "projection_metrics.csv", "view,phase,ssim,ncc", rows);
  }
}

void cmd_dataset(const RunConfig& cfg, int train_cases, int val_cases,
                 const std::filesystem::path& out_dir) {
  if (train_cases < 1 || val_cases < 0) {
    throw ConfigError("dataset: need train_cases >= 1 and val_cases >= 0");
  }
  ensure_dir(out_dir);
  nlohmann::ordered_json manifest;
  manifest["schema"] = 1;
  manifest["train"] = nlohmann::ordered_json::array();
  manifest["validation"] = nlohmann::ordered_json::array();

  const int total = train_cases + val_cases;
  for (int i = 0; i < total; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "case%02d", i);
    const std::filesystem::path case_dir = out_dir / name;
    ensure_dir(case_dir);

    Phantom4D ph = thorax_variant(derive_seed(cfg.seed, "dataset-phantom",
                                              static_cast<std::uint64_t>(i)));
    ph.validate();
    const BreathingSignal sig = synthesize_breathing(cfg.signal.params(
        cfg.geometry.rotation_time,
        derive_seed(cfg.seed, "dataset-signal", static_cast<std::uint64_t>(i))));
    const ProjectionSet proj =
        simulate_4d_scan(ph, sig, cfg.geometry, cfg.phantom.grid(),
                         cfg.phantom.n_phases, cfg.phantom.sampling);
    const GridSpec grid = cfg.recon.grid();
    write_volume(case_dir / "f_ave.rsv",
                 volume_mu_to_hu(fdk(proj, grid, cfg.recon.filter)));
    const Volume4D phases =
        gated_fdk(proj, grid, cfg.phantom.n_phases, cfg.recon.filter);
    const Volume4D truth = ph.sample_phases(
        grid, phase_mean_amplitudes(cfg.phantom.n_phases));

    nlohmann::ordered_json entry;
    entry["degraded"] = nlohmann::ordered_json::array();
    entry["average"] = std::string(name) + "/f_ave.rsv";
    entry["target"] = nlohmann::ordered_json::array();
    for (int p = 0; p < phases.phase_count(); ++p) {
      const std::string f = phase_file_name("f", p);
      const std::string t = phase_file_name("truth", p);
      write_volume(case_dir / f, volume_mu_to_hu(phases.phase(p)));
      write_volume(case_dir / t, truth.phase(p));
      entry["degraded"].push_back(std::string(name) + "/" + f);
      entry["target"].push_back(std::string(name) + "/" + t);
    }
    manifest[i < train_cases ? "train" : "validation"].push_back(entry);
  }

  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot open manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("write failed: manifest.json");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"rstar: desk-scale 4D cone-beam CT artifact laboratory"};
  app.require_subcommand(1);

  int threads = -1;
  app.add_option("--threads", threads,
                 "cap worker threads (0 = all cores; overrides the config)");

  std::filesystem::path config_path, out_dir, proj_path, recon_dir, signal_path;
  std::filesystem::path manifest_path, resume_path, checkpoint_path;
  std::filesystem::path recovered_dir, truth_dir, dump_path;
  int z_chunk = 0;
  int n_train = 3, n_val = 1;

  const auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "JSON run configuration file")
        ->required();
    c->add_option("--out", out_dir, "output directory")->required();
  };

  CLI::App* sim =
      app.add_subcommand("simulate", "simulate a breathing cone-beam scan "
                                     "(scan.rsp, signal.csv, truth volumes)");
  add_common(sim);

  CLI::App* rec = app.add_subcommand(
      "reconstruct", "average and phase-gated FDK reconstruction (f_ave.rsv, "
                     "f_phaseNN.rsv)");
  add_common(rec);
  rec->add_option("--projections", proj_path, "RSP1 scan file")->required();

  CLI::App* rsa = app.add_subcommand(
      "analyze-rsa", "streak, sampling, shroud and trajectory analysis of a "
                     "reconstruction");
  add_common(rsa);
  rsa->add_option("--recon", recon_dir, "reconstruction directory")->required();
  rsa->add_option("--projections", proj_path, "RSP1 scan file")->required();
  rsa->add_option("--signal", signal_path,
                  "breathing signal CSV to correlate the surrogate against");

  CLI::App* tr = app.add_subcommand(
      "train", "two-stage training from a dataset manifest");
  add_common(tr);
  tr->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  tr->add_option("--resume", resume_path, "checkpoint to resume from");

  CLI::App* inf = app.add_subcommand(
      "infer", "restore a reconstruction with a trained checkpoint");
  add_common(inf);
  inf->add_option("--checkpoint", checkpoint_path, "RSC1 checkpoint")->required();
  inf->add_option("--recon", recon_dir, "reconstruction directory")->required();
  inf->add_option("--z-chunk", z_chunk,
                  "overlap-stitch chunk depth (0 = whole volume in one pass)");

  CLI::App* ev = app.add_subcommand(
      "evaluate", "volume-domain and projection-domain metrics");
  add_common(ev);
  ev->add_option("--recovered", recovered_dir, "directory with the volumes "
                                               "under test")
      ->required();
  ev->add_option("--truth", truth_dir, "directory with reference volumes");
  ev->add_option("--projections", proj_path,
                 "measured RSP1 scan for projection-domain metrics");

  CLI::App* ds = app.add_subcommand(
      "dataset", "simulate and reconstruct a training dataset of phantom "
                 "variants");
  add_common(ds);
  ds->add_option("--train-cases", n_train, "number of training cases");
  ds->add_option("--val-cases", n_val, "number of validation cases");

  CLI::App* dc = app.add_subcommand(
      "dump-config", "print the canonical default configuration");
  dc->add_option("--out", dump_path, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (dc->parsed()) {
      const std::string text = default_config_json();
      if (dump_path.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(dump_path, std::ios::binary);
        if (!out) throw IoError("cannot open " + dump_path.string());
        out << text;
      }
      return 0;
    }

    RunConfig cfg = load_config(config_path);
    if (threads >= 0) cfg.threads = threads;
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

    if (sim->parsed()) {
      cmd_simulate(cfg, out_dir);
    } else if (rec->parsed()) {
      cmd_reconstruct(cfg, proj_path, out_dir);
    } else if (rsa->parsed()) {
      cmd_analyze_rsa(cfg, recon_dir, proj_path, signal_path, out_dir);
    } else if (tr->parsed()) {
      cmd_train(cfg, manifest_path, out_dir, resume_path);
    } else if (inf->parsed()) {
      cmd_infer(cfg, checkpoint_path, recon_dir, out_dir, z_chunk);
    } else if (ev->parsed()) {
      cmd_evaluate(cfg, recovered_dir, truth_dir, proj_path, out_dir);
    } else if (ds->parsed()) {
      cmd_dataset(cfg, n_train, n_val, out_dir);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 4;
  } catch (const IntegrityError& e) {
    std::fprintf(stderr, "integrity error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace rstar
