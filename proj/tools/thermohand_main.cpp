// thermohand: synthetic data generation, multi-task training, evaluation,
// and keypoint inference for binary hand silhouettes.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "thermohand/ablation.hpp"
#include "thermohand/annotation.hpp"
#include "thermohand/dataset.hpp"
#include "thermohand/eval.hpp"
#include "thermohand/heatmap.hpp"
#include "thermohand/image_io.hpp"
#include "thermohand/refine.hpp"
#include "thermohand/run_config.hpp"
#include "thermohand/synthgen.hpp"
#include "thermohand/train.hpp"

namespace fs = std::filesystem;
using namespace thermohand;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("THERMOHAND_SEED");
  if (!v || !*v) return std::nullopt;
  return std::strtoull(v, nullptr, 10);
}

struct CommonArgs {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  bool dump_heatmaps = false;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_run_config(args.config_path);
  if (args.seed)
    cfg.optimizer.seed = *args.seed;
  else if (auto es = env_seed())
    cfg.optimizer.seed = *es;
  if (args.epochs) cfg.optimizer.epochs = *args.epochs;
  return cfg;
}

TrainJob make_job(const RunConfig& cfg) {
  TrainJob job;
  job.network = cfg.network;
  job.optimizer = cfg.optimizer;
  job.weights = cfg.loss_weights;
  job.heatmap = cfg.heatmap;
  job.decode = cfg.decode;
  job.match = cfg.match;
  job.config_json = run_config_to_json_text(cfg);
  return job;
}

int cmd_synth(const std::string& spec_path, const CommonArgs& args) {
  GeneratorSpec spec = load_generator_spec(spec_path);
  if (args.seed)
    spec.seed = *args.seed;
  else if (auto es = env_seed())
    spec.seed = *es;
  const std::string out = args.out_dir.empty() ? spec.out_dir : args.out_dir;
  if (out.empty()) throw ConfigError("synth needs --out or out_dir in the spec");
  const GestureVocabulary vocab = GestureVocabulary::default_vocabulary();
  const DatasetManifest manifest = generate_dataset(spec, vocab, out);
  std::cout << "wrote " << manifest.entries.size() << " samples to " << out << "\n";
  return kExitOk;
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  // Load before touching the run directory so a missing manifest leaves no
  // partial output behind.
  const Dataset train_set = Dataset::load(args.data_dir, "train");
  const Dataset val_set = Dataset::load(args.data_dir, "test");
  const TrainReport report = train(train_set, val_set, make_job(cfg), args.out_dir);
  std::cout << "trained " << report.history.size() << " epochs; best epoch "
            << report.best_epoch << "; checkpoints in " << args.out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  net::CheckpointBundle bundle = net::load_checkpoint(args.checkpoint);
  const Dataset test_set = Dataset::load(args.data_dir, "test");
  const std::vector<const Sample*> samples = test_set.pointers();

  PredictOptions opts;
  opts.batch_size = cfg.optimizer.batch_size;
  const std::vector<SamplePrediction> preds = predict_dataset(
      *bundle.net, samples, bundle.vocabulary, cfg.heatmap, cfg.decode, opts);
  const MetricsReport rep = compute_metrics(preds, samples, cfg.match);

  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  fs::create_directories(out);
  write_metrics_csv(rep, (fs::path(out) / "metrics.csv").string());
  write_metrics_json(rep, (fs::path(out) / "metrics.json").string());
  write_confusion_csv(rep, (fs::path(out) / "confusion.csv").string());
  std::cout << "gesture acc " << rep.gesture.accuracy << "%, handedness acc "
            << rep.handedness.accuracy << "%, fingertip acc " << rep.fingertips.accuracy
            << "%, wrist recall " << rep.wrists.recall << "%\n";
  return kExitOk;
}

int cmd_predict(const std::string& input, const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  net::CheckpointBundle bundle = net::load_checkpoint(args.checkpoint);
  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  fs::create_directories(out);

  std::vector<fs::path> inputs;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.path().extension() == ".png") inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
  } else {
    inputs.push_back(input);
  }
  if (inputs.empty()) throw ConfigError("no .png inputs found under " + input);

  for (const fs::path& path : inputs) {
    Sample s;
    s.image = read_mask_png(path.string());
    const std::vector<const Sample*> one{&s};
    const net::Tensor batch = make_input_batch(one, 0, 1);
    const net::ModelOutputs& mo = bundle.net->forward(batch, net::Mode::Eval);

    std::array<double, kNumGestures> probs;
    for (int g = 0; g < kNumGestures; ++g) probs[g] = mo.gesture_probs.sample(0)[g];
    const HeatmapStack stack = net::to_heatmap_stack(mo.heatmaps, 0);
    const RefineResult res = refine(stack, probs, mo.handedness_prob.sample(0)[0],
                                    bundle.vocabulary, cfg.heatmap, cfg.decode);

    const std::string stem = path.stem().string();
    write_annotation((fs::path(out) / (stem + ".json")).string(),
                     {res.gesture, res.handedness, res.keypoints});
    if (args.dump_heatmaps) dump_heatmap_pngs(stack, out, stem);
    std::cout << stem << ": G" << res.gesture.id << " " << to_string(res.handedness) << "\n";
  }
  return kExitOk;
}

int cmd_ablate(const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  const Dataset train_set = Dataset::load(args.data_dir, "train");
  const Dataset test_set = Dataset::load(args.data_dir, "test");
  const AblationResult result = run_ablation(train_set, test_set, make_job(cfg), args.out_dir);
  std::cout << "ablation table: " << result.csv_path << "\n"
            << "fingertip accuracy gap (multi-task minus single-branch): "
            << result.fingertip_accuracy_gap << " points\n";
  return kExitOk;
}

int cmd_inspect(const std::string& sample_path, const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  net::CheckpointBundle bundle = net::load_checkpoint(args.checkpoint);
  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  fs::create_directories(out);

  Sample s;
  s.image = read_mask_png(sample_path);
  const std::vector<const Sample*> one{&s};
  const net::Tensor batch = make_input_batch(one, 0, 1);
  const net::ModelOutputs& mo = bundle.net->forward(batch, net::Mode::Eval);

  std::array<double, kNumGestures> probs;
  for (int g = 0; g < kNumGestures; ++g) probs[g] = mo.gesture_probs.sample(0)[g];
  const HeatmapStack stack = net::to_heatmap_stack(mo.heatmaps, 0);
  const RefineResult res = refine(stack, probs, mo.handedness_prob.sample(0)[0],
                                  bundle.vocabulary, cfg.heatmap, cfg.decode);

  const std::string stem = fs::path(sample_path).stem().string();
  dump_heatmap_pngs(stack, out, stem);

  // Overlay: silhouette at 0/255 with mid-gray crosses on refined keypoints.
  Grid<std::uint8_t> overlay(s.image.width, s.image.height);
  for (size_t i = 0; i < s.image.data.size(); ++i) overlay.data[i] = s.image.data[i] ? 255 : 0;
  auto draw_cross = [&](const Point2& p) {
    const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
    for (int d = -3; d <= 3; ++d) {
      if (overlay.in_bounds(cx + d, cy)) overlay.at(cx + d, cy) = 128;
      if (overlay.in_bounds(cx, cy + d)) overlay.at(cx, cy + d) = 128;
    }
  };
  for (int f = 0; f < kNumFingers; ++f)
    if (res.keypoints.fingertips[f]) draw_cross(*res.keypoints.fingertips[f]);
  draw_cross(res.keypoints.wrists[0]);
  draw_cross(res.keypoints.wrists[1]);
  write_gray8_png((fs::path(out) / (stem + "_overlay.png")).string(), overlay);

  std::cout << annotation_to_json({res.gesture, res.handedness, res.keypoints}) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task hand gesture / handedness / keypoint pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string spec_path, input_path, sample_path;

  auto add_common = [&](CLI::App* cmd, bool with_config = true) {
    if (with_config) cmd->add_option("--config", args.config_path, "run config JSON");
    cmd->add_option("--seed", args.seed, "seed override (fallback: THERMOHAND_SEED)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--spec", spec_path, "generator spec JSON")->required();
  synth->add_option("--out", args.out_dir, "output dataset directory");
  add_common(synth, false);

  CLI::App* train_cmd = app.add_subcommand("train", "train the multi-task network");
  train_cmd->add_option("--data", args.data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", args.out_dir, "run directory")->required();
  train_cmd->add_option("--epochs", args.epochs, "epoch count override");
  add_common(train_cmd);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval_cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("--data", args.data_dir, "dataset directory")->required();
  eval_cmd->add_option("--out", args.out_dir, "report directory");
  add_common(eval_cmd);

  CLI::App* predict_cmd = app.add_subcommand("predict", "annotate images with a checkpoint");
  predict_cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path")->required();
  predict_cmd->add_option("--input", input_path, "PNG image or directory")->required();
  predict_cmd->add_option("--out", args.out_dir, "output directory");
  predict_cmd->add_flag("--dump-heatmaps", args.dump_heatmaps, "write per-channel heatmap PNGs");
  add_common(predict_cmd);

  CLI::App* ablate_cmd = app.add_subcommand("ablate", "single-branch vs multi-task ablation");
  ablate_cmd->add_option("--data", args.data_dir, "dataset directory")->required();
  ablate_cmd->add_option("--out", args.out_dir, "output directory")->required();
  add_common(ablate_cmd);

  CLI::App* inspect_cmd = app.add_subcommand("inspect", "dump heatmaps and keypoint overlay");
  inspect_cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path")->required();
  inspect_cmd->add_option("--sample", sample_path, "sample PNG")->required();
  inspect_cmd->add_option("--out", args.out_dir, "output directory");
  add_common(inspect_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(spec_path, args);
    if (train_cmd->parsed()) return cmd_train(args);
    if (eval_cmd->parsed()) return cmd_eval(args);
    if (predict_cmd->parsed()) return cmd_predict(input_path, args);
    if (ablate_cmd->parsed()) return cmd_ablate(args);
    if (inspect_cmd->parsed()) return cmd_inspect(sample_path, args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
