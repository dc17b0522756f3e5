#include <benchmark/benchmark.h>

#include <random>

#include "thermohand/heatmap.hpp"
#include "thermohand/refine.hpp"
#include "thermohand/synthgen.hpp"

using namespace thermohand;

namespace {

SynthSample make_sample(std::uint64_t seed) {
  GeneratorSpec spec;
  std::mt19937_64 user_rng(seed);
  const UserParams user = sample_user_params(user_rng);
  std::mt19937_64 rng(seed + 1);
  return generate_sample(GestureClass(5), Handedness::Right, user, spec,
                         GestureVocabulary::default_vocabulary(), rng);
}

}  // namespace

static void BM_GenerateSample(benchmark::State& state) {
  GeneratorSpec spec;
  std::mt19937_64 user_rng(1);
  const UserParams user = sample_user_params(user_rng);
  const auto vocab = GestureVocabulary::default_vocabulary();
  std::mt19937_64 rng(2);
  int g = 0;
  for (auto _ : state) {
    auto s = generate_sample(GestureClass(g % 10 + 1), Handedness::Right, user, spec, vocab, rng);
    benchmark::DoNotOptimize(s);
    ++g;
  }
}
BENCHMARK(BM_GenerateSample);

static void BM_EncodeKeypoints(benchmark::State& state) {
  const auto synth = make_sample(3);
  const FingerMask mask = synth.sample.keypoints.visibility();
  const HeatmapConfig cfg;
  for (auto _ : state) {
    auto stack = encode_keypoints(synth.sample.keypoints, mask, cfg);
    benchmark::DoNotOptimize(stack);
  }
}
BENCHMARK(BM_EncodeKeypoints);

static void BM_DecodeFingertips(benchmark::State& state) {
  const auto synth = make_sample(4);
  const FingerMask mask = synth.sample.keypoints.visibility();
  const auto stack = encode_keypoints(synth.sample.keypoints, mask, HeatmapConfig{});
  for (auto _ : state) {
    auto dets = decode_fingertips(stack, mask);
    benchmark::DoNotOptimize(dets);
  }
}
BENCHMARK(BM_DecodeFingertips);

static void BM_DecodeWrists(benchmark::State& state) {
  const auto synth = make_sample(5);
  const auto stack = encode_keypoints(synth.sample.keypoints,
                                      synth.sample.keypoints.visibility(), HeatmapConfig{});
  const DecodeConfig cfg;
  for (auto _ : state) {
    auto wrists = decode_wrists(stack, cfg);
    benchmark::DoNotOptimize(wrists);
  }
}
BENCHMARK(BM_DecodeWrists);

static void BM_Refine(benchmark::State& state) {
  const auto synth = make_sample(6);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const auto stack = encode_keypoints(synth.sample.keypoints,
                                      synth.sample.keypoints.visibility(), HeatmapConfig{});
  std::array<double, kNumGestures> probs{};
  probs[synth.sample.gesture.index()] = 1.0;
  for (auto _ : state) {
    auto res = refine(stack, probs, 1.0, vocab, HeatmapConfig{}, DecodeConfig{});
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_Refine);

BENCHMARK_MAIN();
