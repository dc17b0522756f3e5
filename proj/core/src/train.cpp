#include "thermohand/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "thermohand/synthgen.hpp"

namespace thermohand {

namespace fs = std::filesystem;

namespace {

constexpr double kProbClamp = 1e-7;

double safe_log(double p) { return std::log(std::max(p, kProbClamp)); }

}  // namespace

LossComponents joint_loss(const net::ModelOutputs& pred, const TargetBatch& target,
                          const net::LossWeights& w) {
  const int n = pred.gesture_probs.n;
  if (n != target.gesture_onehot.n || n != target.heatmaps.n)
    throw TrainingError("prediction/target batch size mismatch");
  if (!pred.gesture_probs.all_finite() || !pred.handedness_prob.all_finite() ||
      !pred.heatmaps.all_finite())
    throw TrainingError("non-finite predictions in loss");

  LossComponents out;

  double ce = 0.0;
  for (int i = 0; i < n; ++i) {
    const float* p = pred.gesture_probs.sample(i);
    const float* y = target.gesture_onehot.sample(i);
    for (int c = 0; c < pred.gesture_probs.c; ++c)
      if (y[c] > 0.0f) ce -= y[c] * safe_log(p[c]);
  }
  out.gesture = ce / n;

  double bce = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = pred.handedness_prob.sample(i)[0];
    const double y = target.handedness.sample(i)[0];
    bce -= y * safe_log(p) + (1.0 - y) * safe_log(1.0 - p);
  }
  out.handedness = bce / n;

  double se = 0.0;
  for (std::size_t i = 0; i < pred.heatmaps.size(); ++i) {
    const double d = static_cast<double>(pred.heatmaps.v[i]) - target.heatmaps.v[i];
    se += d * d;
  }
  out.keypoints = se / static_cast<double>(pred.heatmaps.size());

  out.total = w.alpha * out.keypoints + w.beta * out.gesture + w.gamma * out.handedness;
  return out;
}

namespace {

/// Gradients w.r.t. the pre-activation outputs, with the loss weights and
/// batch normalizers folded in (softmax+CE and sigmoid+BCE collapse to p - y).
struct LossGrads {
  net::Tensor d_gesture, d_handedness, d_heatmaps;
};

LossGrads loss_gradients(const net::ModelOutputs& pred, const TargetBatch& target,
                         const net::LossWeights& w, const net::BranchMask& branches) {
  LossGrads g;
  const int n = pred.gesture_probs.n;
  if (branches.gesture) {
    g.d_gesture.resize(n, pred.gesture_probs.c, 1, 1);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < pred.gesture_probs.c; ++c)
        g.d_gesture.sample(i)[c] = static_cast<float>(
            w.beta * (pred.gesture_probs.sample(i)[c] - target.gesture_onehot.sample(i)[c]) / n);
  }
  if (branches.handedness) {
    g.d_handedness.resize(n, 1, 1, 1);
    for (int i = 0; i < n; ++i)
      g.d_handedness.sample(i)[0] = static_cast<float>(
          w.gamma * (pred.handedness_prob.sample(i)[0] - target.handedness.sample(i)[0]) / n);
  }
  if (branches.keypoints) {
    g.d_heatmaps.resize(n, pred.heatmaps.c, pred.heatmaps.h, pred.heatmaps.w);
    const double scale = 2.0 * w.alpha / static_cast<double>(pred.heatmaps.size());
    for (std::size_t i = 0; i < pred.heatmaps.size(); ++i)
      g.d_heatmaps.v[i] =
          static_cast<float>(scale * (pred.heatmaps.v[i] - target.heatmaps.v[i]));
  }
  return g;
}

class SgdOptimizer {
 public:
  SgdOptimizer(net::MultiTaskNet& net, const OptimizerConfig& cfg, const net::BranchMask& branches)
      : net_(net), cfg_(cfg), branches_(branches) {
    for (const auto& p : net.params()) velocity_.emplace_back(p.param->value.size(), 0.0f);
  }

  void step() {
    const auto& params = net_.params();
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!branches_.segment_active(params[k].segment)) continue;  // frozen segment
      auto& p = *params[k].param;
      auto& vel = velocity_[k];
      const float lr = static_cast<float>(cfg_.learning_rate);
      const float mu = static_cast<float>(cfg_.momentum);
      const float wd = static_cast<float>(cfg_.weight_decay);
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const float g = p.grad[i] + wd * p.value[i];
        vel[i] = mu * vel[i] + g;
        p.value[i] -= lr * vel[i];
      }
    }
  }

 private:
  net::MultiTaskNet& net_;
  OptimizerConfig cfg_;
  net::BranchMask branches_;
  std::vector<std::vector<float>> velocity_;
};

struct ValResult {
  LossComponents loss;
  double gesture_acc = 0.0, handedness_acc = 0.0, fingertip_acc = 0.0, wrist_recall = 0.0;
};

ValResult validate(net::MultiTaskNet& net, const Dataset& val_set, const TrainJob& job) {
  const std::vector<const Sample*> samples = val_set.pointers();
  const int n = static_cast<int>(samples.size());
  ValResult res;

  double kp = 0, ge = 0, ha = 0;
  long counted = 0;
  for (int from = 0; from < n; from += job.optimizer.batch_size) {
    const int count = std::min(job.optimizer.batch_size, n - from);
    const net::Tensor input = make_input_batch(samples, from, count);
    const net::ModelOutputs& out = net.forward(input, net::Mode::Eval);
    const TargetBatch targets = make_targets(samples, from, count, val_set.vocab, job.heatmap);
    const LossComponents batch = joint_loss(out, targets, job.weights);
    kp += batch.keypoints * count;
    ge += batch.gesture * count;
    ha += batch.handedness * count;
    counted += count;
  }
  res.loss.keypoints = kp / counted;
  res.loss.gesture = ge / counted;
  res.loss.handedness = ha / counted;
  res.loss.total = job.weights.alpha * res.loss.keypoints + job.weights.beta * res.loss.gesture +
                   job.weights.gamma * res.loss.handedness;

  PredictOptions opts;
  opts.batch_size = job.optimizer.batch_size;
  const std::vector<SamplePrediction> preds =
      predict_dataset(net, samples, val_set.vocab, job.heatmap, job.decode, opts);
  const MetricsReport rep = compute_metrics(preds, samples, job.match);
  res.gesture_acc = rep.gesture.accuracy;
  res.handedness_acc = rep.handedness.accuracy;
  res.fingertip_acc = rep.fingertips.accuracy;
  res.wrist_recall = rep.wrists.recall;
  return res;
}

}  // namespace

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TrainingError("cannot write " + path);
  out << "epoch,L_kp,L_g,L_h,total,val_L_kp,val_L_g,val_L_h,val_total,"
         "val_gesture_acc,val_handedness_acc,val_fingertip_acc,val_wrist_recall\n";
  char buf[512];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  e.epoch, e.train.keypoints, e.train.gesture, e.train.handedness, e.train.total,
                  e.val.keypoints, e.val.gesture, e.val.handedness, e.val.total,
                  e.val_gesture_acc, e.val_handedness_acc, e.val_fingertip_acc,
                  e.val_wrist_recall);
    out << buf;
  }
}

TrainReport train(const Dataset& train_set, const Dataset& val_set, const TrainJob& job,
                  const std::string& out_dir) {
  if (train_set.samples.empty()) throw TrainingError("training dataset is empty");

  // The split must be user-disjoint.
  {
    std::vector<int> train_users, val_users;
    for (const Sample& s : train_set.samples) train_users.push_back(s.meta.user);
    for (const Sample& s : val_set.samples) val_users.push_back(s.meta.user);
    for (int u : val_users)
      if (u >= 0 && std::find(train_users.begin(), train_users.end(), u) != train_users.end())
        throw TrainingError("train/validation splits share user " + std::to_string(u));
  }

  fs::create_directories(out_dir);
  {
    std::ofstream cfg(fs::path(out_dir) / "config.json");
    cfg << (job.config_json.empty() ? "{}" : job.config_json) << "\n";
  }

  net::MultiTaskNet net(job.network);
  net.init_params(job.optimizer.seed);
  SgdOptimizer opt(net, job.optimizer, job.branches);

  const std::vector<const Sample*> samples = train_set.pointers();
  const int n = static_cast<int>(samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  double best_val = std::numeric_limits<double>::infinity();
  const std::string best_path = (fs::path(out_dir) / "best.ckpt").string();
  const std::string final_path = (fs::path(out_dir) / "final.ckpt").string();

  std::vector<const Sample*> batch_ptrs;
  for (int epoch = 1; epoch <= job.optimizer.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(job.optimizer.seed, 0x73687566ULL /* "shuf" */, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double kp = 0, ge = 0, ha = 0;
    long counted = 0;
    for (int from = 0; from < n; from += job.optimizer.batch_size) {
      const int count = std::min(job.optimizer.batch_size, n - from);
      batch_ptrs.clear();
      for (int i = 0; i < count; ++i) batch_ptrs.push_back(samples[order[from + i]]);

      const net::Tensor input = make_input_batch(batch_ptrs, 0, count);
      const net::ModelOutputs& out = net.forward(input, net::Mode::Train);
      const TargetBatch targets = make_targets(batch_ptrs, 0, count, train_set.vocab, job.heatmap);
      const LossComponents batch_loss = joint_loss(out, targets, job.weights);
      if (!std::isfinite(batch_loss.total))
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) +
                            " (L_kp=" + std::to_string(batch_loss.keypoints) +
                            ", L_g=" + std::to_string(batch_loss.gesture) +
                            ", L_h=" + std::to_string(batch_loss.handedness) + ")");

      const LossGrads grads = loss_gradients(out, targets, job.weights, job.branches);
      net.zero_grads();
      net.backward(job.branches.gesture ? &grads.d_gesture : nullptr,
                   job.branches.handedness ? &grads.d_handedness : nullptr,
                   job.branches.keypoints ? &grads.d_heatmaps : nullptr);
      opt.step();

      kp += batch_loss.keypoints * count;
      ge += batch_loss.gesture * count;
      ha += batch_loss.handedness * count;
      counted += count;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train.keypoints = kp / counted;
    stats.train.gesture = ge / counted;
    stats.train.handedness = ha / counted;
    stats.train.total = job.weights.alpha * stats.train.keypoints +
                        job.weights.beta * stats.train.gesture +
                        job.weights.gamma * stats.train.handedness;

    const ValResult val = validate(net, val_set, job);
    stats.val = val.loss;
    stats.val_gesture_acc = val.gesture_acc;
    stats.val_handedness_acc = val.handedness_acc;
    stats.val_fingertip_acc = val.fingertip_acc;
    stats.val_wrist_recall = val.wrist_recall;
    report.history.push_back(stats);

    if (val.loss.total < best_val) {
      best_val = val.loss.total;
      report.best_epoch = epoch;
      save_checkpoint(net, train_set.vocab, job.weights, best_path);
    }
    write_history_csv(report.history, (fs::path(out_dir) / "history.csv").string());
  }

  save_checkpoint(net, train_set.vocab, job.weights, final_path);
  report.best_checkpoint = best_path;
  report.final_checkpoint = final_path;
  return report;
}

TrainReport train_single_branch(Branch branch, const Dataset& train_set, const Dataset& val_set,
                                TrainJob job, const std::string& out_dir) {
  job.branches = {branch == Branch::Gesture, branch == Branch::Handedness,
                  branch == Branch::Keypoints};
  // Zero-weight the other components so the logged total is exactly the
  // active branch's weighted loss.
  if (!job.branches.keypoints) job.weights.alpha = 0.0;
  if (!job.branches.gesture) job.weights.beta = 0.0;
  if (!job.branches.handedness) job.weights.gamma = 0.0;
  return train(train_set, val_set, job, out_dir);
}

}  // namespace thermohand
