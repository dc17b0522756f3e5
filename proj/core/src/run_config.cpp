#include "thermohand/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace thermohand {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

json optimizer_to_json(const OptimizerConfig& o) {
  return {{"learning_rate", o.learning_rate}, {"weight_decay", o.weight_decay},
          {"momentum", o.momentum},           {"batch_size", o.batch_size},
          {"epochs", o.epochs},               {"seed", o.seed}};
}

OptimizerConfig optimizer_from_json(const json& j) {
  reject_unknown(j, {"learning_rate", "weight_decay", "momentum", "batch_size", "epochs", "seed"},
                 "optimizer");
  OptimizerConfig o;
  o.learning_rate = j.value("learning_rate", o.learning_rate);
  o.weight_decay = j.value("weight_decay", o.weight_decay);
  o.momentum = j.value("momentum", o.momentum);
  o.batch_size = j.value("batch_size", o.batch_size);
  o.epochs = j.value("epochs", o.epochs);
  o.seed = j.value("seed", o.seed);
  if (o.learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (o.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  return o;
}

json weights_to_json(const net::LossWeights& w) {
  return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
}

net::LossWeights weights_from_json(const json& j) {
  reject_unknown(j, {"alpha", "beta", "gamma"}, "loss_weights");
  net::LossWeights w;
  w.alpha = j.value("alpha", w.alpha);
  w.beta = j.value("beta", w.beta);
  w.gamma = j.value("gamma", w.gamma);
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0)
    throw ConfigError("loss weights must be non-negative");
  return w;
}

json heatmap_to_json(const HeatmapConfig& h) {
  return {{"map_size", h.map_size},
          {"channels", h.channels},
          {"gaussian_variance", h.gaussian_variance},
          {"peak_amplitude", h.peak_amplitude},
          {"scale_factor", h.scale_factor},
          {"truncate_sigmas", h.truncate_sigmas}};
}

HeatmapConfig heatmap_from_json(const json& j) {
  reject_unknown(j,
                 {"map_size", "channels", "gaussian_variance", "peak_amplitude", "scale_factor",
                  "truncate_sigmas"},
                 "heatmap");
  HeatmapConfig h;
  h.map_size = j.value("map_size", h.map_size);
  h.channels = j.value("channels", h.channels);
  h.gaussian_variance = j.value("gaussian_variance", h.gaussian_variance);
  h.peak_amplitude = j.value("peak_amplitude", h.peak_amplitude);
  h.scale_factor = j.value("scale_factor", h.scale_factor);
  h.truncate_sigmas = j.value("truncate_sigmas", h.truncate_sigmas);
  if (h.gaussian_variance <= 0) throw ConfigError("gaussian_variance must be positive");
  return h;
}

json decode_to_json(const DecodeConfig& d) {
  json j = {{"wrist_min_separation", d.wrist_min_separation}};
  if (d.baseline_threshold)
    j["baseline_threshold"] = *d.baseline_threshold;
  else
    j["baseline_threshold"] = nullptr;
  return j;
}

DecodeConfig decode_from_json(const json& j) {
  reject_unknown(j, {"wrist_min_separation", "baseline_threshold"}, "decode");
  DecodeConfig d;
  d.wrist_min_separation = j.value("wrist_min_separation", d.wrist_min_separation);
  if (j.contains("baseline_threshold") && !j["baseline_threshold"].is_null())
    d.baseline_threshold = j["baseline_threshold"].get<double>();
  if (d.wrist_min_separation <= 0) throw ConfigError("wrist_min_separation must be positive");
  return d;
}

}  // namespace

RunConfig RunConfig::desk_scale() {
  RunConfig cfg;
  cfg.network = net::NetworkConfig::desk_scale();
  cfg.optimizer.epochs = 10;
  cfg.decode.baseline_threshold = 0.5;
  return cfg;
}

std::string run_config_to_json_text(const RunConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["network"] = json::parse(net::network_config_to_json_text(cfg.network));
  j["optimizer"] = optimizer_to_json(cfg.optimizer);
  j["loss_weights"] = weights_to_json(cfg.loss_weights);
  j["heatmap"] = heatmap_to_json(cfg.heatmap);
  j["decode"] = decode_to_json(cfg.decode);
  j["match"] = {{"radius", cfg.match.radius}};
  return j.dump(2);
}

RunConfig run_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"schema_version", "network", "optimizer", "loss_weights", "heatmap", "decode",
                  "match"},
                 "run config");
  RunConfig cfg;
  cfg.schema_version = j.value("schema_version", kRunConfigSchemaVersion);
  if (cfg.schema_version != kRunConfigSchemaVersion)
    throw ConfigError("unsupported config schema_version " + std::to_string(cfg.schema_version));
  try {
    if (j.contains("network")) cfg.network = net::network_config_from_json_text(j["network"].dump());
  } catch (const net::ModelError& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("optimizer")) cfg.optimizer = optimizer_from_json(j["optimizer"]);
  if (j.contains("loss_weights")) cfg.loss_weights = weights_from_json(j["loss_weights"]);
  if (j.contains("heatmap")) cfg.heatmap = heatmap_from_json(j["heatmap"]);
  if (j.contains("decode")) cfg.decode = decode_from_json(j["decode"]);
  if (j.contains("match")) {
    reject_unknown(j["match"], {"radius"}, "match");
    cfg.match.radius = j["match"].value("radius", cfg.match.radius);
    if (cfg.match.radius <= 0) throw ConfigError("match radius must be positive");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json_text(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << run_config_to_json_text(cfg) << "\n";
}

std::string generator_spec_to_json_text(const GeneratorSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["users"] = spec.users;
  j["test_users"] = spec.test_users;
  j["samples_per_gesture_per_hand"] = spec.samples_per_gesture_per_hand;
  j["rotation_range_deg"] = spec.rotation_range_deg;
  j["forearm_fractions"] = spec.forearm_fractions;
  j["min_angle_gap_deg"] = spec.min_angle_gap_deg;
  if (!spec.out_dir.empty()) j["out_dir"] = spec.out_dir;
  return j.dump(2);
}

GeneratorSpec generator_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("generator spec is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"seed", "users", "test_users", "samples_per_gesture_per_hand",
                  "rotation_range_deg", "forearm_fractions", "min_angle_gap_deg", "out_dir"},
                 "generator spec");
  GeneratorSpec spec;
  spec.seed = j.value("seed", spec.seed);
  spec.users = j.value("users", spec.users);
  spec.test_users = j.value("test_users", spec.test_users);
  spec.samples_per_gesture_per_hand =
      j.value("samples_per_gesture_per_hand", spec.samples_per_gesture_per_hand);
  spec.rotation_range_deg = j.value("rotation_range_deg", spec.rotation_range_deg);
  if (j.contains("forearm_fractions"))
    spec.forearm_fractions = j["forearm_fractions"].get<std::vector<double>>();
  spec.min_angle_gap_deg = j.value("min_angle_gap_deg", spec.min_angle_gap_deg);
  spec.out_dir = j.value("out_dir", spec.out_dir);
  if (spec.users < 1) throw ConfigError("generator spec needs users >= 1");
  if (spec.samples_per_gesture_per_hand < 1)
    throw ConfigError("generator spec needs samples_per_gesture_per_hand >= 1");
  return spec;
}

GeneratorSpec load_generator_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open generator spec: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return generator_spec_from_json_text(ss.str());
}

}  // namespace thermohand
