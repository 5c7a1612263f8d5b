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

#include "rstar/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include "json.hpp"
#include "rstar/io.hpp"
#include "rstar/metrics.hpp"
#include "rstar/types.hpp"

namespace rstar {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj,
                         std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("manifest: unknown key \"" + item.key() + "\" in " +
                        where);
    }
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError("manifest: " + where + " must be a string");
  std::filesystem::path p = j.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::vector<std::filesystem::path> resolve_path_list(
    const std::filesystem::path& base, const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("manifest: " + where + " must be a non-empty array");
  }
  std::vector<std::filesystem::path> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(resolve_path(base, j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

TrainCase parse_case(const json& j, const std::filesystem::path& base,
                     const std::string& where) {
  if (!j.is_object()) throw ConfigError("manifest: " + where + " must be an object");
  reject_unknown_keys(j, {"degraded", "average", "target"}, where);
  for (const char* k : {"degraded", "average", "target"}) {
    if (!j.contains(k)) {
      throw ConfigError("manifest: " + where + " is missing \"" + k + "\"");
    }
  }
  TrainCase c;
  c.degraded = resolve_path_list(base, j["degraded"], where + ".degraded");
  c.average = resolve_path(base, j["average"], where + ".average");
  c.target = resolve_path_list(base, j["target"], where + ".target");
  if (c.target.size() != c.degraded.size()) {
    throw ConfigError("manifest: " + where +
                      ": target and degraded phase counts differ");
  }
  return c;
}

std::vector<TrainCase> parse_case_list(const json& j,
                                       const std::filesystem::path& base,
                                       const std::string& where) {
  if (!j.is_array()) throw ConfigError("manifest: " + where + " must be an array");
  std::vector<TrainCase> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_case(j[i], base, where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_manifest: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("load_manifest: " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest: top level must be an object");
  reject_unknown_keys(j, {"schema", "train", "validation"}, "top level");
  if (!j.contains("schema") || !j["schema"].is_number_integer() ||
      j["schema"].get<int>() != 1) {
    throw ConfigError("manifest: schema must be the integer 1");
  }
  if (!j.contains("train")) throw ConfigError("manifest: missing \"train\"");
  const std::filesystem::path base = path.parent_path();
  DatasetManifest m;
  m.train = parse_case_list(j["train"], base, "train");
  if (j.contains("validation")) {
    m.validation = parse_case_list(j["validation"], base, "validation");
  }
  return m;
}

LoadedCase load_case(const TrainCase& c) {
  LoadedCase out;
  for (const auto& p : c.degraded) out.degraded.push_back(read_volume(p));
  out.average = read_volume(c.average);
  for (const auto& p : c.target) out.target.push_back(read_volume(p));
  const GridSpec& g = out.degraded.grid();
  if (!(out.average.grid() == g) || !(out.target.grid() == g)) {
    throw DomainError("load_case: all volumes of a case must share one grid");
  }
  return out;
}

void TrainConfig::validate() const {
  net.validate();
  if (stage1_epochs < 0 || stage2_epochs < 0) {
    throw ConfigError("TrainConfig: epoch counts must be non-negative");
  }
  if (stage1_epochs + stage2_epochs < 1) {
    throw ConfigError("TrainConfig: at least one epoch is required");
  }
  if (!(lr_lo > 0.0) || !(lr_hi >= lr_lo)) {
    throw ConfigError("TrainConfig: need lr_hi >= lr_lo > 0");
  }
  if (crops_per_case < 1) {
    throw ConfigError("TrainConfig: crops_per_case must be positive");
  }
  for (const auto& b : stage2_blocks) {
    if (b[0] < 1 || b[1] < 1 || b[2] < 1) {
      throw ConfigError("TrainConfig: stage2 block dims must be positive");
    }
  }
  if (out_dir.empty()) throw ConfigError("TrainConfig: out_dir is required");
}

std::vector<SliceSample> stage1_samples(const std::vector<LoadedCase>& cases) {
  std::vector<SliceSample> out;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const int nz = cases[ci].degraded.grid().nz;
    for (int iz = 0; iz < nz; ++iz) {
      out.push_back({static_cast<int>(ci), iz});
    }
  }
  return out;
}

CropSpec draw_crop(Rng& rng, int case_idx, const GridSpec& grid,
                   const std::array<int, 3>& shape, int levels) {
  const int align = 1 << (levels - 1);
  const int nx = shape[0], ny = shape[1], nz = shape[2];
  if (nx % align != 0 || ny % align != 0 || nx < 3 * align || ny < 3 * align) {
    throw DomainError(
        "draw_crop: x and y extents must be multiples of the pooling factor "
        "and at least three times it");
  }
  if (nz < 2) throw DomainError("draw_crop: z extent must be at least 2");
  if (nx > grid.nx || ny > grid.ny || nz > grid.nz) {
    throw DomainError("draw_crop: block does not fit inside the volume");
  }
  CropSpec s;
  s.case_idx = case_idx;
  s.nx = nx;
  s.ny = ny;
  s.nz = nz;
  s.x0 = static_cast<int>(rng.uniform_int(0, grid.nx - nx));
  s.y0 = static_cast<int>(rng.uniform_int(0, grid.ny - ny));
  s.z0 = static_cast<int>(rng.uniform_int(0, grid.nz - nz));
  return s;
}

Tensor5<float> pack_case_input(const LoadedCase& c) {
  return pack_input<float>(c.degraded, c.average);
}

Tensor5<float> pack_case_target(const LoadedCase& c) {
  const GridSpec& g = c.target.grid();
  const int nt = c.target.phase_count();
  Tensor5<float> out(1, nt, g.nz, g.ny, g.nx);
  for (int it = 0; it < nt; ++it) {
    const Volume3D& v = c.target.phase(it);
    float* dst = &out.at(0, it, 0, 0, 0);
    const float* src = v.data().data();
    const std::size_t n = static_cast<std::size_t>(g.nz) * g.ny * g.nx;
    for (std::size_t i = 0; i < n; ++i) dst[i] = normalize_hu(src[i]);
  }
  return out;
}

Tensor5<float> crop_tensor(const Tensor5<float>& t, const CropSpec& s) {
  if (s.x0 < 0 || s.y0 < 0 || s.z0 < 0 || s.x0 + s.nx > t.x() ||
      s.y0 + s.ny > t.y() || s.z0 + s.nz > t.z()) {
    throw DomainError("crop_tensor: crop exceeds tensor bounds");
  }
  Tensor5<float> out(t.c(), t.t(), s.nz, s.ny, s.nx);
  for (int c = 0; c < t.c(); ++c) {
    for (int it = 0; it < t.t(); ++it) {
      for (int iz = 0; iz < s.nz; ++iz) {
        for (int iy = 0; iy < s.ny; ++iy) {
          const float* src = &t.at(c, it, s.z0 + iz, s.y0 + iy, s.x0);
          float* dst = &out.at(c, it, iz, iy, 0);
          std::copy(src, src + s.nx, dst);
        }
      }
    }
  }
  return out;
}

Tensor5<float> slice_tensor(const Tensor5<float>& t, int iz) {
  if (iz < 0 || iz >= t.z()) throw DomainError("slice_tensor: iz out of range");
  Tensor5<float> out(t.c(), t.t(), 1, t.y(), t.x());
  for (int c = 0; c < t.c(); ++c) {
    for (int it = 0; it < t.t(); ++it) {
      const float* src = &t.at(c, it, iz, 0, 0);
      float* dst = &out.at(c, it, 0, 0, 0);
      std::copy(src, src + static_cast<std::size_t>(t.y()) * t.x(), dst);
    }
  }
  return out;
}

double train_step(Network<float>& net, Network<float>& grads,
                  const std::vector<ParamRef<float>>& params,
                  const std::vector<ParamRef<float>>& grad_refs,
                  AdamState<float>& optim, const Tensor5<float>& in,
                  const Tensor5<float>& target, double lr,
                  const AdamHyper& hyper) {
  NetCache<float> cache;
  const Tensor5<float> pred = network_forward(net, in, &cache);
  auto [loss, gout] = l1_loss(pred, target);
  for (const auto& g : grad_refs) {
    std::fill(g.data->begin(), g.data->end(), 0.0f);
  }
  network_backward(net, gout, cache, grads);
  adam_step(params, grad_refs, optim, lr, hyper);
  return loss;
}

double validation_lung_ssim(const Network<float>& net,
                            const std::vector<LoadedCase>& val) {
  double acc = 0.0;
  int n = 0;
  for (const auto& c : val) {
    const Volume4D rec = infer_volume(net, c.degraded, c.average);
    for (int p = 0; p < c.target.phase_count(); ++p) {
      Mask m = lung_mask(c.target.phase(p));
      if (mask_count(m) == 0) m = mask_all(c.target.grid());
      acc += ssim3d(rec.phase(p), c.target.phase(p), m);
      ++n;
    }
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return acc / n;
}

TrainOutput run_training(const TrainConfig& cfg, const DatasetManifest& manifest) {
  cfg.validate();
  if (manifest.train.empty()) {
    throw ConfigError("run_training: manifest has no training cases");
  }
  std::filesystem::create_directories(cfg.out_dir);

  std::vector<LoadedCase> train_cases;
  train_cases.reserve(manifest.train.size());
  for (const auto& tc : manifest.train) train_cases.push_back(load_case(tc));
  std::vector<LoadedCase> val_cases;
  val_cases.reserve(manifest.validation.size());
  for (const auto& vc : manifest.validation) val_cases.push_back(load_case(vc));

  std::vector<Tensor5<float>> inputs, targets;
  inputs.reserve(train_cases.size());
  targets.reserve(train_cases.size());
  for (const auto& c : train_cases) {
    inputs.push_back(pack_case_input(c));
    targets.push_back(pack_case_target(c));
  }

  Network<float> net;
  AdamState<float> optim;
  TrainCursor cursor;
  const bool fresh = cfg.resume_from.empty();
  if (fresh) {
    Rng rng(derive_seed(cfg.seed, "net-init"));
    net = build_network<float>(cfg.net, rng);
  } else {
    Checkpoint ck = load_checkpoint(cfg.resume_from);
    if (!ck.has_optim) {
      throw IntegrityError(
          "run_training: checkpoint carries no optimizer state; cannot resume");
    }
    const NetworkConfig& a = ck.net.cfg;
    const NetworkConfig& b = cfg.net;
    if (a.levels != b.levels || a.channels != b.channels ||
        a.in_channels != b.in_channels || a.residual != b.residual) {
      throw ConfigError(
          "run_training: checkpoint architecture differs from the config");
    }
    net = std::move(ck.net);
    optim = std::move(ck.optim);
    cursor = ck.cursor;
  }
  Network<float> grads = zero_like(net);
  const auto params = param_table(net);
  const auto grad_refs = param_table(grads);
  if (fresh) adam_init(optim, params);

  int s1_done = 0, s2_done = 0;
  if (cursor.stage == 1) {
    s1_done = cursor.epoch;
  } else if (cursor.stage == 2) {
    s1_done = cfg.stage1_epochs;
    s2_done = cursor.epoch;
  }
  if (s1_done > cfg.stage1_epochs || s2_done > cfg.stage2_epochs) {
    throw ConfigError("run_training: checkpoint is past the configured schedule");
  }

  const std::filesystem::path log_path = cfg.out_dir / "train_log.csv";
  const bool new_log = fresh || !std::filesystem::exists(log_path) ||
                       std::filesystem::file_size(log_path) == 0;
  std::ofstream log(log_path, fresh ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("run_training: cannot open train_log.csv");
  if (new_log) log << "stage,epoch,loss,val_ssim_lung\n";

  TrainOutput out;
  const int total = cfg.stage1_epochs + cfg.stage2_epochs;

  const auto record = [&](int stage, int epoch, double loss, double val) {
    char line[160];
    std::snprintf(line, sizeof line, "%s,%d,%.9g,%.9g\n",
                  stage == 1 ? "I" : "II", epoch, loss, val);
    log << line;
    log.flush();
    out.log.push_back({stage, epoch, loss, val});
  };

  const auto save_epoch = [&](int stage, int epoch) {
    char name[64];
    std::snprintf(name, sizeof name, "stage%d_epoch%03d.rsc", stage, epoch);
    const TrainCursor cur{stage, epoch, optim.step};
    save_checkpoint(cfg.out_dir / name, net, cur, &optim);
    save_checkpoint(cfg.out_dir / "latest.rsc", net, cur, &optim);
  };

  for (int e = s1_done; e < cfg.stage1_epochs; ++e) {
    net.set_stage1_mode(true);
    auto samples = stage1_samples(train_cases);
    Rng sh(derive_seed(cfg.seed, "stage1-shuffle", static_cast<std::uint64_t>(e)));
    sh.shuffle(samples.begin(), samples.end());
    const double lr = learning_rate(e, total, cfg.lr_hi, cfg.lr_lo);
    double acc = 0.0;
    for (const auto& s : samples) {
      const Tensor5<float> in = slice_tensor(inputs[s.case_idx], s.iz);
      const Tensor5<float> tg = slice_tensor(targets[s.case_idx], s.iz);
      acc += train_step(net, grads, params, grad_refs, optim, in, tg, lr, cfg.adam);
    }
    const double loss = samples.empty() ? 0.0 : acc / samples.size();
    const double val = validation_lung_ssim(net, val_cases);
    record(1, e + 1, loss, val);
    save_epoch(1, e + 1);
  }
  net.set_stage1_mode(false);

  for (int e = s2_done; e < cfg.stage2_epochs; ++e) {
    Rng rng(derive_seed(cfg.seed, "stage2-crop", static_cast<std::uint64_t>(e)));
    std::vector<CropSpec> crops;
    int counter = 0;
    for (std::size_t ci = 0; ci < train_cases.size(); ++ci) {
      for (int k = 0; k < cfg.crops_per_case; ++k) {
        const auto& shape = cfg.stage2_blocks[counter % cfg.stage2_blocks.size()];
        crops.push_back(draw_crop(rng, static_cast<int>(ci),
                                  train_cases[ci].degraded.grid(), shape,
                                  cfg.net.levels));
        ++counter;
      }
    }
    rng.shuffle(crops.begin(), crops.end());
    const double lr =
        learning_rate(cfg.stage1_epochs + e, total, cfg.lr_hi, cfg.lr_lo);
    double acc = 0.0;
    for (const auto& cs : crops) {
      const Tensor5<float> in = crop_tensor(inputs[cs.case_idx], cs);
      const Tensor5<float> tg = crop_tensor(targets[cs.case_idx], cs);
      acc += train_step(net, grads, params, grad_refs, optim, in, tg, lr, cfg.adam);
    }
    const double loss = crops.empty() ? 0.0 : acc / crops.size();
    const double val = validation_lung_ssim(net, val_cases);
    record(2, e + 1, loss, val);
    save_epoch(2, e + 1);
  }

  const int final_stage = cfg.stage2_epochs > 0 ? 2 : 1;
  const int final_epoch = final_stage == 2 ? cfg.stage2_epochs : cfg.stage1_epochs;
  const TrainCursor final_cur{final_stage, final_epoch, optim.step};
  out.final_checkpoint = cfg.out_dir / "final.rsc";
  save_checkpoint(out.final_checkpoint, net, final_cur, &optim);
  return out;
}

}  // namespace rstar
