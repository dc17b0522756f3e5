#include <benchmark/benchmark.h>

#include <random>

#include "thermohand/dataset.hpp"
#include "thermohand/eval.hpp"
#include "thermohand/net/model.hpp"
#include "thermohand/synthgen.hpp"
#include "thermohand/train.hpp"

using namespace thermohand;

namespace {

std::vector<Sample> make_samples(int n, std::uint64_t seed) {
  GeneratorSpec spec;
  std::mt19937_64 user_rng(seed);
  const UserParams user = sample_user_params(user_rng);
  const auto vocab = GestureVocabulary::default_vocabulary();
  std::mt19937_64 rng(seed + 1);
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i)
    out.push_back(generate_sample(GestureClass(i % 10 + 1),
                                  i % 2 ? Handedness::Left : Handedness::Right, user, spec,
                                  vocab, rng)
                      .sample);
  return out;
}

net::Tensor input_for(const std::vector<Sample>& samples) {
  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  return make_input_batch(ptrs, 0, static_cast<int>(ptrs.size()));
}

}  // namespace

static void BM_ForwardDesk_Batch32(benchmark::State& state) {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(1);
  const auto samples = make_samples(32, 10);
  const net::Tensor input = input_for(samples);
  for (auto _ : state) {
    const auto& out = net.forward(input, net::Mode::Eval);
    benchmark::DoNotOptimize(out.heatmaps.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ForwardDesk_Batch32)->Unit(benchmark::kMillisecond);

static void BM_TrainStepDesk_Batch32(benchmark::State& state) {
  net::MultiTaskNet net{net::NetworkConfig::desk_scale()};
  net.init_params(1);
  const auto samples = make_samples(32, 11);
  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const net::Tensor input = input_for(samples);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const TargetBatch targets = make_targets(ptrs, 0, 32, vocab, HeatmapConfig{});
  const net::LossWeights w;

  for (auto _ : state) {
    const auto& out = net.forward(input, net::Mode::Train);
    net::Tensor d_g(32, 10, 1, 1), d_h(32, 1, 1, 1), d_k(32, 6, 50, 50);
    for (int i = 0; i < 32; ++i) {
      for (int c = 0; c < 10; ++c)
        d_g.sample(i)[c] = static_cast<float>(
            w.beta * (out.gesture_probs.sample(i)[c] - targets.gesture_onehot.sample(i)[c]) / 32);
      d_h.sample(i)[0] = static_cast<float>(
          w.gamma * (out.handedness_prob.sample(i)[0] - targets.handedness.sample(i)[0]) / 32);
    }
    const double ks = 2.0 * w.alpha / d_k.size();
    for (std::size_t i = 0; i < d_k.size(); ++i)
      d_k.v[i] = static_cast<float>(ks * (out.heatmaps.v[i] - targets.heatmaps.v[i]));
    net.zero_grads();
    net.backward(&d_g, &d_h, &d_k);
    benchmark::DoNotOptimize(net.params().front().param->grad.data());
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStepDesk_Batch32)->Unit(benchmark::kMillisecond);

static void BM_ForwardDefault_Batch1(benchmark::State& state) {
  net::MultiTaskNet net{net::NetworkConfig{}};
  net.init_params(1);
  const auto samples = make_samples(1, 12);
  const net::Tensor input = input_for(samples);
  for (auto _ : state) {
    const auto& out = net.forward(input, net::Mode::Eval);
    benchmark::DoNotOptimize(out.heatmaps.v.data());
  }
}
BENCHMARK(BM_ForwardDefault_Batch1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
