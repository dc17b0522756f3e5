#pragma once

#include <string>

#include "thermohand/train.hpp"

namespace thermohand {

struct AblationResult {
  MetricsReport gesture_only;
  MetricsReport handedness_only;
  MetricsReport keypoints_only;  // threshold-baseline keypoint decode
  MetricsReport multi_task;      // gesture/handedness-aware refine decode
  double fingertip_accuracy_gap = 0.0;  // multi-task minus single-branch, points
  std::string csv_path;
};

/// Trains the three single-branch variants plus the full multi-task model
/// under identical seeds and budgets, evaluates each on the test split, and
/// writes an ablation table (4 tasks x 3 metrics, "each branch" row from the
/// single-task models, "all branch" row from the joint model).
///
/// Single-branch keypoints are decoded with the fixed-threshold baseline:
/// without the other branches there is no gesture mask or handedness to
/// filter with. The multi-task row uses the full refine path.
AblationResult run_ablation(const Dataset& train_set, const Dataset& test_set,
                            const TrainJob& base_job, const std::string& out_dir);

void write_ablation_csv(const AblationResult& r, const std::string& path);

}  // namespace thermohand
