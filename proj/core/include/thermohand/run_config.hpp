#pragma once

#include <string>

#include "thermohand/eval.hpp"
#include "thermohand/heatmap.hpp"
#include "thermohand/net/model.hpp"
#include "thermohand/synthgen.hpp"
#include "thermohand/train.hpp"

namespace thermohand {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kRunConfigSchemaVersion = 1;

/// Merged persistent configuration for the CLI. Unknown keys are rejected;
/// serialization round-trips losslessly. Defaults mirror the published
/// training recipe (lr 0.001, momentum 0.95, weight decay 1e-3, batch 32,
/// 100 epochs, loss weights 0.77/0.15/0.08).
struct RunConfig {
  int schema_version = kRunConfigSchemaVersion;
  net::NetworkConfig network;
  OptimizerConfig optimizer;
  net::LossWeights loss_weights;
  HeatmapConfig heatmap;
  DecodeConfig decode;
  MatchConfig match;

  static RunConfig desk_scale();  // reduced widths for CPU-budget runs
};

std::string run_config_to_json_text(const RunConfig& cfg);
RunConfig run_config_from_json_text(const std::string& text);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

std::string generator_spec_to_json_text(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json_text(const std::string& text);
GeneratorSpec load_generator_spec(const std::string& path);

}  // namespace thermohand
