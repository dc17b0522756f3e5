#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fd_check.hpp"
#include "test_util.hpp"
#include "thermohand/dataset.hpp"
#include "thermohand/eval.hpp"
#include "thermohand/net/layers.hpp"
#include "thermohand/net/model.hpp"

using namespace thermohand;
using net::Mode;

namespace {

net::NetworkConfig tiny_config() {
  net::NetworkConfig cfg;
  cfg.trunk_widths = {2, 3, 3, 4};
  cfg.up_widths = {3, 2};
  cfg.shared_widths = {3, 3};
  cfg.keypoint_widths = {3, 3, 2, 2};
  cfg.keypoint_up_width = 2;
  cfg.keypoint_penultimate_width = 2;
  cfg.gesture_hidden = 8;
  cfg.parameter_budget.reset();
  return cfg;
}

net::Tensor batch_from_samples(thtest::SampleStream& stream, int n) {
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) samples.push_back(stream.next().sample);
  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  return make_input_batch(ptrs, 0, n);
}

}  // namespace

TEST_CASE("conv and dense parameter counting") {
  net::Conv2d conv(1, 8);
  CHECK(conv.weight.value.size() + conv.bias.value.size() == 80);
  net::Dense dense(10, 10);
  CHECK(dense.weight.value.size() + dense.bias.value.size() == 110);
}

TEST_CASE("default configuration lands inside the parameter budget") {
  net::MultiTaskNet net{net::NetworkConfig{}};
  const auto count = net.parameter_count();
  CHECK(count >= 5'000'000);
  CHECK(count <= 7'500'000);
  MESSAGE("default parameter count: ", count);
}

TEST_CASE("budget violations are rejected at build time") {
  net::NetworkConfig cfg = net::NetworkConfig::desk_scale();
  cfg.parameter_budget = std::pair{5.0e6, 7.5e6};  // desk widths are far below
  CHECK_THROWS_AS(net::MultiTaskNet{cfg}, net::ModelError);
}

TEST_CASE("forward emits the contracted shapes for several batch sizes") {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(3);
  thtest::SampleStream stream(42);
  for (int n : {1, 2, 7}) {
    const net::Tensor input = batch_from_samples(stream, n);
    const auto& out = net.forward(input, Mode::Eval);
    CHECK(out.gesture_probs.n == n);
    CHECK(out.gesture_probs.c == 10);
    CHECK(out.handedness_prob.n == n);
    CHECK(out.handedness_prob.c == 1);
    CHECK(out.heatmaps.n == n);
    CHECK(out.heatmaps.c == 6);
    CHECK(out.heatmaps.h == 50);
    CHECK(out.heatmaps.w == 50);
  }
}

TEST_CASE("all-zero input produces finite outputs with a normalized softmax") {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(5);
  net::Tensor input(2, 1, 100, 100);
  const auto& out = net.forward(input, Mode::Eval);
  for (int i = 0; i < 2; ++i) {
    double sum = 0;
    for (int c = 0; c < 10; ++c) sum += out.gesture_probs.sample(i)[c];
    CHECK(std::abs(sum - 1.0) <= 1e-5);
    CHECK(out.handedness_prob.sample(i)[0] >= 0.0f);
    CHECK(out.handedness_prob.sample(i)[0] <= 1.0f);
  }
}

TEST_CASE("wrong input shape or range is rejected") {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net::Tensor bad(1, 1, 64, 64);
  CHECK_THROWS_AS(net.forward(bad, Mode::Eval), net::ShapeError);
  net::Tensor range(1, 1, 100, 100);
  range.v[0] = 2.0f;
  CHECK_THROWS(net.forward(range, Mode::Eval));
}

TEST_CASE("identical images in one batch produce identical outputs") {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(7);
  thtest::SampleStream stream(43);
  const Sample s = stream.next().sample;
  const std::vector<const Sample*> ptrs{&s, &s, &s};
  const net::Tensor input = make_input_batch(ptrs, 0, 3);
  const auto& out = net.forward(input, Mode::Eval);
  for (int i = 1; i < 3; ++i) {
    for (int c = 0; c < 10; ++c)
      CHECK(out.gesture_probs.sample(i)[c] == out.gesture_probs.sample(0)[c]);
    for (std::size_t j = 0; j < out.heatmaps.per_sample(); ++j)
      CHECK(out.heatmaps.sample(i)[j] == out.heatmaps.sample(0)[j]);
  }
}

TEST_CASE("inference for one image is batch-size independent in eval mode") {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(11);
  thtest::SampleStream stream(44);
  const Sample shared = stream.next().sample;

  std::vector<Sample> filler;
  for (int i = 0; i < 31; ++i) filler.push_back(stream.next().sample);
  std::vector<const Sample*> big{&shared};
  for (const auto& s : filler) big.push_back(&s);

  const std::vector<const Sample*> one{&shared};
  const auto& out1 = net.forward(make_input_batch(one, 0, 1), Mode::Eval);
  const net::Tensor g1 = out1.gesture_probs, h1 = out1.handedness_prob, k1 = out1.heatmaps;
  const auto& out32 = net.forward(make_input_batch(big, 0, 32), Mode::Eval);

  for (int c = 0; c < 10; ++c)
    CHECK(out32.gesture_probs.sample(0)[c] == doctest::Approx(g1.sample(0)[c]).epsilon(1e-6));
  CHECK(out32.handedness_prob.sample(0)[0] == doctest::Approx(h1.sample(0)[0]).epsilon(1e-6));
  for (std::size_t j = 0; j < k1.per_sample(); ++j)
    CHECK(out32.heatmaps.sample(0)[j] == doctest::Approx(k1.sample(0)[j]).epsilon(1e-5));
}

TEST_CASE("joint-loss gradients match central finite differences") {
  net::MultiTaskNet net{tiny_config()};
  CHECK(net.parameter_count() <= 10'000);
  net.init_params(17);

  thtest::SampleStream stream(45);
  std::vector<Sample> samples{stream.next().sample, stream.next().sample};
  const std::vector<const Sample*> ptrs{&samples[0], &samples[1]};
  const net::Tensor input = make_input_batch(ptrs, 0, 2);
  const TargetBatch targets =
      make_targets(ptrs, 0, 2, GestureVocabulary::default_vocabulary(), HeatmapConfig{});

  const auto outcome = thtest::fd_gradient_check(net, input, targets, net::LossWeights{});
  CHECK(outcome.checked >= 15);
  CHECK(outcome.within_tolerance == outcome.checked);
  MESSAGE("worst relative error: ", outcome.worst_rel_err);
}

TEST_CASE("checkpoint save/load reproduces inference bit for bit") {
  const auto dir = thtest::scratch_dir("ckpt");
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(23);
  thtest::SampleStream stream(46);
  const Sample s = stream.next().sample;
  const std::vector<const Sample*> ptrs{&s};
  const net::Tensor input = make_input_batch(ptrs, 0, 1);

  const auto& before = net.forward(input, Mode::Eval);
  const net::Tensor g = before.gesture_probs, h = before.handedness_prob, k = before.heatmaps;

  const std::string path = dir + "/model.ckpt";
  save_checkpoint(net, GestureVocabulary::default_vocabulary(), net::LossWeights{}, path);
  auto bundle = net::load_checkpoint(path);
  const auto& after = bundle.net->forward(input, Mode::Eval);

  for (int c = 0; c < 10; ++c) CHECK(after.gesture_probs.sample(0)[c] == g.sample(0)[c]);
  CHECK(after.handedness_prob.sample(0)[0] == h.sample(0)[0]);
  for (std::size_t j = 0; j < k.per_sample(); ++j)
    CHECK(after.heatmaps.sample(0)[j] == k.sample(0)[j]);
}

TEST_CASE("checkpoints from another schema version are refused") {
  const auto dir = thtest::scratch_dir("ckpt_version");
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  const std::string path = dir + "/model.ckpt";
  save_checkpoint(net, GestureVocabulary::default_vocabulary(), net::LossWeights{}, path);

  std::ifstream in(path + ".json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("\"schema_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"schema_version\": 9");
  std::ofstream out(path + ".json");
  out << text;
  out.close();

  CHECK_THROWS_AS(net::load_checkpoint(path), net::ModelError);
}

TEST_CASE("max pooling uses floor semantics (25 -> 12)") {
  net::MaxPool2d pool;
  net::Tensor x(1, 1, 25, 25);
  net::Tensor y;
  pool.forward(x, y);
  CHECK(y.h == 12);
  CHECK(y.w == 12);
}
