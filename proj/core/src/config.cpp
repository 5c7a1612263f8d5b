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

#include "rstar/config.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "json.hpp"

namespace rstar {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Strict section reader: every key must be read exactly once.  Reading a
// missing key and leaving a key unread both raise ConfigError naming the key,
// so config files always spell out the complete schema (the canonical file
// comes from default_config_json()).
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: " + path_ + " must be an object");
  }

  const json& require(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) {
      throw ConfigError("config: missing key \"" + path_ + "." + key + "\"");
    }
    return *it;
  }

  double number(const char* key) {
    const json& v = require(key);
    if (!v.is_number()) fail(key, "a number");
    return v.get<double>();
  }

  int integer(const char* key) {
    const json& v = require(key);
    if (!v.is_number_integer()) fail(key, "an integer");
    return v.get<int>();
  }

  std::uint64_t u64(const char* key) {
    const json& v = require(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      const std::int64_t t = v.get<std::int64_t>();
      if (t < 0) fail(key, "non-negative");
      return static_cast<std::uint64_t>(t);
    }
    fail(key, "a non-negative integer");
  }

  bool boolean(const char* key) {
    const json& v = require(key);
    if (!v.is_boolean()) fail(key, "a boolean");
    return v.get<bool>();
  }

  std::string str(const char* key) {
    const json& v = require(key);
    if (!v.is_string()) fail(key, "a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const char* key) {
    const json& v = require(key);
    if (!v.is_array() || v.size() != 3) fail(key, "an array of 3 numbers");
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  std::vector<int> int_array(const char* key) {
    const json& v = require(key);
    if (!v.is_array()) fail(key, "an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  Section sub(const char* key) { return Section(require(key), path_ + "." + key); }

  // Call after reading every expected key.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("config: unknown key \"" + path_ + "." + item.key() + "\"");
      }
    }
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("config: \"" + path_ + "." + key + "\" must be " + what);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

MotionSampling parse_sampling(const std::string& s, const char* where) {
  if (s == "phase_locked") return MotionSampling::PhaseLocked;
  if (s == "continuous") return MotionSampling::Continuous;
  throw ConfigError(std::string("config: ") + where +
                    " must be \"phase_locked\" or \"continuous\"");
}

RampFilter parse_filter(const std::string& s, const char* where) {
  if (s == "ram_lak") return RampFilter::RamLak;
  if (s == "shepp_logan") return RampFilter::SheppLogan;
  throw ConfigError(std::string("config: ") + where +
                    " must be \"ram_lak\" or \"shepp_logan\"");
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("load_config: " + path.string() + ": " + e.what());
  }

  RunConfig cfg;
  Section root(j, "config");
  const int schema = root.integer("schema");
  if (schema != 1) throw ConfigError("config: schema must be 1");
  cfg.seed = root.u64("seed");
  cfg.threads = root.integer("threads");

  {
    Section s = root.sub("phantom");
    cfg.phantom.variant = s.u64("variant");
    cfg.phantom.nx = s.integer("nx");
    cfg.phantom.ny = s.integer("ny");
    cfg.phantom.nz = s.integer("nz");
    cfg.phantom.spacing = s.vec3("spacing_mm");
    cfg.phantom.n_phases = s.integer("n_phases");
    cfg.phantom.sampling =
        parse_sampling(s.str("motion_sampling"), "phantom.motion_sampling");
    s.finish();
  }
  {
    Section s = root.sub("signal");
    cfg.signal.mean_period_s = s.number("mean_period_s");
    cfg.signal.period_jitter = s.number("period_jitter");
    cfg.signal.peak_jitter = s.number("peak_jitter");
    cfg.signal.sample_rate_hz = s.number("sample_rate_hz");
    s.finish();
  }
  {
    Section s = root.sub("geometry");
    cfg.geometry.sad = s.number("sad_mm");
    cfg.geometry.sdd = s.number("sdd_mm");
    cfg.geometry.det_width = s.number("det_width_mm");
    cfg.geometry.det_height = s.number("det_height_mm");
    cfg.geometry.nu = static_cast<std::uint32_t>(s.integer("nu"));
    cfg.geometry.nv = static_cast<std::uint32_t>(s.integer("nv"));
    cfg.geometry.offset_u = s.number("offset_u_mm");
    cfg.geometry.views_per_turn = static_cast<std::uint32_t>(s.integer("views_per_turn"));
    cfg.geometry.rotation_time = s.number("rotation_time_s");
    cfg.geometry.start_angle = s.number("start_angle_deg") * kPi / 180.0;
    cfg.geometry.direction = s.integer("direction");
    s.finish();
  }
  {
    Section s = root.sub("recon");
    cfg.recon.nx = s.integer("nx");
    cfg.recon.ny = s.integer("ny");
    cfg.recon.nz = s.integer("nz");
    cfg.recon.spacing = s.vec3("spacing_mm");
    cfg.recon.filter = parse_filter(s.str("filter"), "recon.filter");
    s.finish();
  }
  {
    Section s = root.sub("rsa");
    cfg.rsa.slice_z = s.integer("slice_z");
    cfg.rsa.shroud_max_shift = s.integer("shroud_max_shift");
    cfg.rsa.gap_threshold_deg = s.number("gap_threshold_deg");
    cfg.rsa.streak_min_radius = s.number("streak_min_radius");
    cfg.rsa.streak_max_radius = s.number("streak_max_radius");
    cfg.rsa.flow.levels = s.integer("flow_levels");
    cfg.rsa.flow.window = s.integer("flow_window");
    cfg.rsa.flow.iterations = s.integer("flow_iterations");
    cfg.rsa.flow.cond_limit = s.number("flow_cond_limit");
    cfg.rsa.trajectory_stride = s.integer("trajectory_stride");
    cfg.rsa.kmeans_iterations = s.integer("kmeans_iterations");
    s.finish();
  }
  {
    Section s = root.sub("network");
    cfg.network.levels = s.integer("levels");
    cfg.network.channels = s.int_array("channels");
    cfg.network.in_channels = s.integer("in_channels");
    cfg.network.residual = s.boolean("residual");
    s.finish();
  }
  {
    Section s = root.sub("training");
    cfg.training.stage1_epochs = s.integer("stage1_epochs");
    cfg.training.stage2_epochs = s.integer("stage2_epochs");
    cfg.training.lr_hi = s.number("lr_hi");
    cfg.training.lr_lo = s.number("lr_lo");
    cfg.training.crops_per_case = s.integer("crops_per_case");
    {
      const json& b = s.require("blocks");
      if (!b.is_array() || b.size() != cfg.training.stage2_blocks.size()) {
        throw ConfigError("config: \"training.blocks\" must be an array of 3 triples");
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b[i].is_array() || b[i].size() != 3 || !b[i][0].is_number_integer() ||
            !b[i][1].is_number_integer() || !b[i][2].is_number_integer()) {
          throw ConfigError("config: \"training.blocks\" must be an array of 3 triples");
        }
        cfg.training.stage2_blocks[i] = {b[i][0].get<int>(), b[i][1].get<int>(),
                                         b[i][2].get<int>()};
      }
    }
    cfg.training.adam.beta1 = s.number("adam_beta1");
    cfg.training.adam.beta2 = s.number("adam_beta2");
    cfg.training.adam.eps = s.number("adam_eps");
    s.finish();
  }
  {
    Section s = root.sub("evaluation");
    cfg.evaluation.ssim.window = s.integer("ssim_window");
    cfg.evaluation.ssim.k1 = s.number("ssim_k1");
    cfg.evaluation.ssim.k2 = s.number("ssim_k2");
    cfg.evaluation.ssim.data_range = s.number("data_range_hu");
    cfg.evaluation.tumor_margin_mm = s.number("tumor_margin_mm");
    s.finish();
  }
  root.finish();

  cfg.training.net = cfg.network;
  cfg.training.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
  if (phantom.nx < 1 || phantom.ny < 1 || phantom.nz < 1) {
    throw ConfigError("config: phantom grid dims must be positive");
  }
  if (!(phantom.spacing.x > 0.0 && phantom.spacing.y > 0.0 && phantom.spacing.z > 0.0)) {
    throw ConfigError("config: phantom spacing must be positive");
  }
  if (phantom.n_phases < 1) throw ConfigError("config: n_phases must be >= 1");
  if (!(signal.mean_period_s > 0.0)) {
    throw ConfigError("config: signal.mean_period_s must be positive");
  }
  if (signal.period_jitter < 0.0 || signal.peak_jitter < 0.0) {
    throw ConfigError("config: signal jitter must be non-negative");
  }
  if (!(signal.sample_rate_hz > 0.0)) {
    throw ConfigError("config: signal.sample_rate_hz must be positive");
  }
  geometry.validate();
  if (recon.nx < 1 || recon.ny < 1 || recon.nz < 1) {
    throw ConfigError("config: recon grid dims must be positive");
  }
  if (!(recon.spacing.x > 0.0 && recon.spacing.y > 0.0 && recon.spacing.z > 0.0)) {
    throw ConfigError("config: recon spacing must be positive");
  }
  if (rsa.slice_z < -1) throw ConfigError("config: rsa.slice_z must be >= -1");
  if (rsa.shroud_max_shift < 1) {
    throw ConfigError("config: rsa.shroud_max_shift must be >= 1");
  }
  if (!(rsa.gap_threshold_deg > 0.0)) {
    throw ConfigError("config: rsa.gap_threshold_deg must be positive");
  }
  if (rsa.streak_min_radius < 0.0 || rsa.streak_max_radius < 0.0) {
    throw ConfigError("config: rsa streak radii must be non-negative");
  }
  if (rsa.flow.levels < 1 || rsa.flow.window < 3 || rsa.flow.window % 2 == 0 ||
      rsa.flow.iterations < 1 || !(rsa.flow.cond_limit > 1.0)) {
    throw ConfigError("config: rsa flow options out of range");
  }
  if (rsa.trajectory_stride < 1) {
    throw ConfigError("config: rsa.trajectory_stride must be >= 1");
  }
  if (rsa.kmeans_iterations < 1) {
    throw ConfigError("config: rsa.kmeans_iterations must be >= 1");
  }
  network.validate();
  // The training section is validated when a training run starts; its
  // out_dir comes from the command line, not the file.
  if (evaluation.ssim.window < 3 || evaluation.ssim.window % 2 == 0) {
    throw ConfigError("config: evaluation.ssim_window must be odd and >= 3");
  }
  if (!(evaluation.ssim.k1 > 0.0) || !(evaluation.ssim.k2 > 0.0) ||
      !(evaluation.ssim.data_range > 0.0)) {
    throw ConfigError("config: evaluation ssim constants must be positive");
  }
  if (evaluation.tumor_margin_mm < 0.0) {
    throw ConfigError("config: evaluation.tumor_margin_mm must be non-negative");
  }
}

std::string default_config_json() {
  const RunConfig d;
  ordered_json j;
  j["schema"] = 1;
  j["seed"] = d.seed;
  j["threads"] = d.threads;
  j["phantom"] = {{"variant", d.phantom.variant},
                  {"nx", d.phantom.nx},
                  {"ny", d.phantom.ny},
                  {"nz", d.phantom.nz},
                  {"spacing_mm", {d.phantom.spacing.x, d.phantom.spacing.y, d.phantom.spacing.z}},
                  {"n_phases", d.phantom.n_phases},
                  {"motion_sampling", "phase_locked"}};
  j["signal"] = {{"mean_period_s", d.signal.mean_period_s},
                 {"period_jitter", d.signal.period_jitter},
                 {"peak_jitter", d.signal.peak_jitter},
                 {"sample_rate_hz", d.signal.sample_rate_hz}};
  j["geometry"] = {{"sad_mm", d.geometry.sad},
                   {"sdd_mm", d.geometry.sdd},
                   {"det_width_mm", d.geometry.det_width},
                   {"det_height_mm", d.geometry.det_height},
                   {"nu", d.geometry.nu},
                   {"nv", d.geometry.nv},
                   {"offset_u_mm", d.geometry.offset_u},
                   {"views_per_turn", d.geometry.views_per_turn},
                   {"rotation_time_s", d.geometry.rotation_time},
                   {"start_angle_deg", d.geometry.start_angle * 180.0 / kPi},
                   {"direction", d.geometry.direction}};
  j["recon"] = {{"nx", d.recon.nx},
                {"ny", d.recon.ny},
                {"nz", d.recon.nz},
                {"spacing_mm", {d.recon.spacing.x, d.recon.spacing.y, d.recon.spacing.z}},
                {"filter", "ram_lak"}};
  j["rsa"] = {{"slice_z", d.rsa.slice_z},
              {"shroud_max_shift", d.rsa.shroud_max_shift},
              {"gap_threshold_deg", d.rsa.gap_threshold_deg},
              {"streak_min_radius", d.rsa.streak_min_radius},
              {"streak_max_radius", d.rsa.streak_max_radius},
              {"flow_levels", d.rsa.flow.levels},
              {"flow_window", d.rsa.flow.window},
              {"flow_iterations", d.rsa.flow.iterations},
              {"flow_cond_limit", d.rsa.flow.cond_limit},
              {"trajectory_stride", d.rsa.trajectory_stride},
              {"kmeans_iterations", d.rsa.kmeans_iterations}};
  j["network"] = {{"levels", d.network.levels},
                  {"channels", d.network.channels},
                  {"in_channels", d.network.in_channels},
                  {"residual", d.network.residual}};
  ordered_json blocks = ordered_json::array();
  for (const auto& b : d.training.stage2_blocks) {
    blocks.push_back({b[0], b[1], b[2]});
  }
  j["training"] = {{"stage1_epochs", d.training.stage1_epochs},
                   {"stage2_epochs", d.training.stage2_epochs},
                   {"lr_hi", d.training.lr_hi},
                   {"lr_lo", d.training.lr_lo},
                   {"crops_per_case", d.training.crops_per_case},
                   {"blocks", blocks},
                   {"adam_beta1", d.training.adam.beta1},
                   {"adam_beta2", d.training.adam.beta2},
                   {"adam_eps", d.training.adam.eps}};
  j["evaluation"] = {{"ssim_window", d.evaluation.ssim.window},
                     {"ssim_k1", d.evaluation.ssim.k1},
                     {"ssim_k2", d.evaluation.ssim.k2},
                     {"data_range_hu", d.evaluation.ssim.data_range},
                     {"tumor_margin_mm", d.evaluation.tumor_margin_mm}};
  return j.dump(2) + "\n";
}

}  // namespace rstar
