#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermohand/dataset.hpp"
#include "thermohand/eval.hpp"
#include "thermohand/net/model.hpp"

namespace thermohand {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SGD with momentum; weight decay enters as L2 added to the gradient.
struct OptimizerConfig {
  double learning_rate = 0.001;
  double weight_decay = 1e-3;
  double momentum = 0.95;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
};

struct LossComponents {
  double keypoints = 0.0;
  double gesture = 0.0;
  double handedness = 0.0;
  double total = 0.0;
};

/// Joint loss of the three branches: mean squared error over all heatmap
/// cells, categorical cross-entropy for the gesture, binary cross-entropy
/// for handedness; total = alpha*L_kp + beta*L_g + gamma*L_h.
LossComponents joint_loss(const net::ModelOutputs& pred, const TargetBatch& target,
                          const net::LossWeights& w);

struct EpochStats {
  int epoch = 0;
  LossComponents train;
  LossComponents val;
  double val_gesture_acc = 0.0;
  double val_handedness_acc = 0.0;
  double val_fingertip_acc = 0.0;
  double val_wrist_recall = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> history;
  std::string best_checkpoint;
  std::string final_checkpoint;
  int best_epoch = -1;
};

enum class Branch { Gesture, Handedness, Keypoints };

struct TrainJob {
  net::NetworkConfig network;
  OptimizerConfig optimizer;
  net::LossWeights weights;
  HeatmapConfig heatmap;
  DecodeConfig decode;
  MatchConfig match;
  net::BranchMask branches;          // zero-weighted branches neither propagate nor update
  std::string config_json;           // verbatim content for the run dir's config.json
};

/// Runs the optimization loop: seeded shuffled batches, best-by-validation-
/// total-loss and final checkpoints, history.csv and config.json in out_dir.
/// Deterministic for a fixed seed. Throws TrainingError on non-finite loss.
TrainReport train(const Dataset& train_set, const Dataset& val_set, const TrainJob& job,
                  const std::string& out_dir);

/// Trains with the other two loss components zero-weighted; their heads stay
/// built but receive no gradients and no updates.
TrainReport train_single_branch(Branch branch, const Dataset& train_set, const Dataset& val_set,
                                TrainJob job, const std::string& out_dir);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace thermohand
