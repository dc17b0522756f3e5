#include "thermohand/net/model.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace thermohand::net {

using nlohmann::json;

NetworkConfig NetworkConfig::desk_scale() {
  NetworkConfig cfg;
  cfg.trunk_widths = {8, 16, 24, 32};
  cfg.up_widths = {24, 16};
  cfg.shared_widths = {16, 16};
  cfg.keypoint_widths = {24, 24, 16, 16};
  cfg.keypoint_up_width = 16;
  cfg.keypoint_penultimate_width = 12;
  cfg.gesture_hidden = 64;
  cfg.parameter_budget.reset();
  return cfg;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ModelError(msg);
}

}  // namespace

MultiTaskNet::MultiTaskNet(const NetworkConfig& cfg)
    : cfg_(cfg),
      e1_(cfg.input_channels, cfg.trunk_widths[0]),
      e2_(cfg.trunk_widths[0], cfg.trunk_widths[1]),
      e3_(cfg.trunk_widths[1], cfg.trunk_widths[2]),
      e4_(cfg.trunk_widths[2], cfg.trunk_widths[3]),
      bn_e1_(cfg.trunk_widths[0]),
      bn_e2_(cfg.trunk_widths[1]),
      bn_e3_(cfg.trunk_widths[2]),
      bn_e4_(cfg.trunk_widths[3]),
      // 6 -> 12, then (12 -> 25 needs no output padding with pad 0)
      up1_(cfg.trunk_widths[3], cfg.up_widths[0], 3, 2, 1, 1),
      up2_(cfg.up_widths[0] + cfg.trunk_widths[3], cfg.up_widths[1], 3, 2, 0, 0),
      bn_u1_(cfg.up_widths[0]),
      bn_u2_(cfg.up_widths[1]),
      s1_(cfg.up_widths[1] + cfg.trunk_widths[2], cfg.shared_widths[0]),
      s2_(cfg.shared_widths[0], cfg.shared_widths[1]),
      bn_s1_(cfg.shared_widths[0]),
      bn_s2_(cfg.shared_widths[1]),
      fc_g1_(cfg.shared_widths[1], cfg.gesture_hidden),
      fc_g2_(cfg.gesture_hidden, cfg.gesture_classes),
      fc_h_(cfg.shared_widths[1], 1),
      k1_(cfg.up_widths[1] + cfg.trunk_widths[2], cfg.keypoint_widths[0]),
      k2_(cfg.keypoint_widths[0], cfg.keypoint_widths[1]),
      k3_(cfg.keypoint_widths[1], cfg.keypoint_widths[2]),
      k4_(cfg.keypoint_widths[2], cfg.keypoint_widths[3]),
      k5_(cfg.keypoint_up_width, cfg.keypoint_penultimate_width),
      k6_(cfg.keypoint_penultimate_width, cfg.heatmap_channels),
      bn_k1_(cfg.keypoint_widths[0]),
      bn_k2_(cfg.keypoint_widths[1]),
      bn_k3_(cfg.keypoint_widths[2]),
      bn_k4_(cfg.keypoint_widths[3]),
      bn_ku_(cfg.keypoint_up_width),
      bn_k5_(cfg.keypoint_penultimate_width),
      kup_(cfg.keypoint_widths[3], cfg.keypoint_up_width, 3, 2, 1, 1) {
  require(cfg.input_size == 100, "input size must be 100");
  require(cfg.heatmap_channels == 6, "keypoint head must emit 6 channels");
  for (int wdt : cfg.trunk_widths) require(wdt > 0, "trunk widths must be positive");
  for (int wdt : cfg.up_widths) require(wdt > 0, "up widths must be positive");
  wire_params();
  init_params(0);
  check_budget();
}

void MultiTaskNet::wire_params() {
  auto add_conv = [&](Conv2d& c, Segment s, const std::string& name) {
    param_refs_.push_back({&c.weight, s, name + ".weight"});
    param_refs_.push_back({&c.bias, s, name + ".bias"});
  };
  auto add_tconv = [&](ConvTranspose2d& c, Segment s, const std::string& name) {
    param_refs_.push_back({&c.weight, s, name + ".weight"});
    param_refs_.push_back({&c.bias, s, name + ".bias"});
  };
  auto add_bn = [&](BatchNorm2d& b, Segment s, const std::string& name) {
    param_refs_.push_back({&b.gamma, s, name + ".gamma"});
    param_refs_.push_back({&b.beta, s, name + ".beta"});
  };
  auto add_fc = [&](Dense& d, Segment s, const std::string& name) {
    param_refs_.push_back({&d.weight, s, name + ".weight"});
    param_refs_.push_back({&d.bias, s, name + ".bias"});
  };

  using enum Segment;
  add_conv(e1_, Trunk, "e1");
  add_bn(bn_e1_, Trunk, "bn_e1");
  add_conv(e2_, Trunk, "e2");
  add_bn(bn_e2_, Trunk, "bn_e2");
  add_conv(e3_, Trunk, "e3");
  add_bn(bn_e3_, Trunk, "bn_e3");
  add_conv(e4_, Trunk, "e4");
  add_bn(bn_e4_, Trunk, "bn_e4");
  add_tconv(up1_, Trunk, "up1");
  add_bn(bn_u1_, Trunk, "bn_u1");
  add_tconv(up2_, Trunk, "up2");
  add_bn(bn_u2_, Trunk, "bn_u2");
  add_conv(s1_, SharedGH, "s1");
  add_bn(bn_s1_, SharedGH, "bn_s1");
  add_conv(s2_, SharedGH, "s2");
  add_bn(bn_s2_, SharedGH, "bn_s2");
  add_fc(fc_g1_, GestureHead, "fc_g1");
  add_fc(fc_g2_, GestureHead, "fc_g2");
  add_fc(fc_h_, HandednessHead, "fc_h");
  add_conv(k1_, KeypointHead, "k1");
  add_bn(bn_k1_, KeypointHead, "bn_k1");
  add_conv(k2_, KeypointHead, "k2");
  add_bn(bn_k2_, KeypointHead, "bn_k2");
  add_conv(k3_, KeypointHead, "k3");
  add_bn(bn_k3_, KeypointHead, "bn_k3");
  add_conv(k4_, KeypointHead, "k4");
  add_bn(bn_k4_, KeypointHead, "bn_k4");
  add_tconv(kup_, KeypointHead, "kup");
  add_bn(bn_ku_, KeypointHead, "bn_ku");
  add_conv(k5_, KeypointHead, "k5");
  add_bn(bn_k5_, KeypointHead, "bn_k5");
  add_conv(k6_, KeypointHead, "k6");
}

void MultiTaskNet::init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x746e6574ULL);
  const double g = cfg_.conv_init_gain;  // BN-preceded layers only
  e1_.init_he(rng, g);
  e2_.init_he(rng, g);
  e3_.init_he(rng, g);
  e4_.init_he(rng, g);
  up1_.init_he(rng, g);
  up2_.init_he(rng, g);
  s1_.init_he(rng, g);
  s2_.init_he(rng, g);
  fc_g1_.init_he(rng);
  fc_g2_.init_he(rng);
  fc_h_.init_he(rng);
  k1_.init_he(rng, g);
  k2_.init_he(rng, g);
  k3_.init_he(rng, g);
  k4_.init_he(rng, g);
  kup_.init_he(rng, g);
  k5_.init_he(rng, g);
  k6_.init_he(rng, 1.0 / cfg_.heatmap_head_gain);
  // Start the heatmap head near zero output; targets are mostly zeros.
  const float bias0 = static_cast<float>(cfg_.heatmap_head_bias / cfg_.heatmap_head_gain);
  std::fill(k6_.bias.value.begin(), k6_.bias.value.end(), bias0);
}

std::int64_t MultiTaskNet::parameter_count() const {
  std::int64_t total = 0;
  for (const auto& p : param_refs_) total += static_cast<std::int64_t>(p.param->value.size());
  return total;
}

void MultiTaskNet::check_budget() const {
  if (!cfg_.parameter_budget) return;
  const auto [lo, hi] = *cfg_.parameter_budget;
  const double count = static_cast<double>(parameter_count());
  if (count < lo || count > hi)
    throw ModelError("parameter count " + std::to_string(static_cast<long long>(count)) +
                     " outside budget [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

const ModelOutputs& MultiTaskNet::forward(const Tensor& input, Mode mode) {
  check_shape(input, input.n, cfg_.input_channels, cfg_.input_size, cfg_.input_size, "input");
  require(input.n >= 1, "batch must be non-empty");
  for (float v : input.v)
    require(v >= 0.0f && v <= 1.0f, "input values must lie in [0,1]");
  in_ = input;

  // encoder: conv/bn/relu/pool x4, 100 -> 50 -> 25 -> 12 -> 6
  e1_.forward(in_, e1c_);
  bn_e1_.forward(e1c_, e1b_, mode);
  relu_forward(e1b_, e1a_);
  pool1_.forward(e1a_, e1p_);
  e2_.forward(e1p_, e2c_);
  bn_e2_.forward(e2c_, e2b_, mode);
  relu_forward(e2b_, e2a_);
  pool2_.forward(e2a_, e2p_);
  e3_.forward(e2p_, e3c_);
  bn_e3_.forward(e3c_, e3b_, mode);
  relu_forward(e3b_, e3a_);
  pool3_.forward(e3a_, e3p_);
  e4_.forward(e3p_, e4c_);
  bn_e4_.forward(e4c_, e4b_, mode);
  relu_forward(e4b_, e4a_);
  pool4_.forward(e4a_, e4p_);

  // decoder with skip concatenations at 12x12 and 25x25
  up1_.forward(e4p_, u1c_);
  bn_u1_.forward(u1c_, u1b_, mode);
  relu_forward(u1b_, u1a_);
  concat_channels(u1a_, e4a_, cat1_);
  up2_.forward(cat1_, u2c_);
  bn_u2_.forward(u2c_, u2b_, mode);
  relu_forward(u2b_, u2a_);
  concat_channels(u2a_, e3a_, cat2_);

  // shared gesture/handedness convs
  s1_.forward(cat2_, s1c_);
  bn_s1_.forward(s1c_, s1b_, mode);
  relu_forward(s1b_, s1a_);
  s2_.forward(s1a_, s2c_);
  bn_s2_.forward(s2c_, s2b_, mode);
  relu_forward(s2b_, s2a_);

  // gesture head: GAP -> dense -> relu -> dense -> softmax
  global_avg_pool_forward(s2a_, gap_);
  fc_g1_.forward(gap_, gf1_);
  relu_forward(gf1_, gf1a_);
  fc_g2_.forward(gf1a_, glogits_);
  softmax_forward(glogits_, out_.gesture_probs);

  // handedness head: GAP -> dense -> sigmoid
  fc_h_.forward(gap_, hlogit_);
  sigmoid_forward(hlogit_, out_.handedness_prob);

  // keypoint head: 4 convs -> up-conv to 50x50 -> 2 convs -> sigmoid
  k1_.forward(cat2_, k1c_);
  bn_k1_.forward(k1c_, k1b_, mode);
  relu_forward(k1b_, k1a_);
  k2_.forward(k1a_, k2c_);
  bn_k2_.forward(k2c_, k2b_, mode);
  relu_forward(k2b_, k2a_);
  k3_.forward(k2a_, k3c_);
  bn_k3_.forward(k3c_, k3b_, mode);
  relu_forward(k3b_, k3a_);
  k4_.forward(k3a_, k4c_);
  bn_k4_.forward(k4c_, k4b_, mode);
  relu_forward(k4b_, k4a_);
  kup_.forward(k4a_, kupc_);
  bn_ku_.forward(kupc_, kupb_, mode);
  relu_forward(kupb_, kupa_);
  k5_.forward(kupa_, k5c_);
  bn_k5_.forward(k5c_, k5b_, mode);
  relu_forward(k5b_, k5a_);
  k6_.forward(k5a_, k6c_);
  out_.heatmaps = k6c_;
  if (cfg_.heatmap_head_gain != 1.0) {
    const float gain = static_cast<float>(cfg_.heatmap_head_gain);
    for (float& v : out_.heatmaps.v) v *= gain;
  }

  require(out_.gesture_probs.all_finite() && out_.handedness_prob.all_finite() &&
              out_.heatmaps.all_finite(),
          "non-finite network outputs");
  return out_;
}

void MultiTaskNet::backward(const Tensor* d_gesture_logits, const Tensor* d_handedness_logit,
                            const Tensor* d_heatmap_logits) {
  Tensor d_cat2(cat2_.n, cat2_.c, cat2_.h, cat2_.w);
  Tensor scratch_a, scratch_b;

  // keypoint branch
  if (d_heatmap_logits) {
    Tensor d;
    if (cfg_.heatmap_head_gain != 1.0) {
      // k6c_ holds gain * conv output; chain the fixed gain into the conv.
      Tensor scaled = *d_heatmap_logits;
      const float gain = static_cast<float>(cfg_.heatmap_head_gain);
      for (float& v : scaled.v) v *= gain;
      k6_.backward(k5a_, scaled, &d);
    } else {
      k6_.backward(k5a_, *d_heatmap_logits, &d);
    }
    relu_backward(k5a_, d, scratch_a);
    bn_k5_.backward(k5c_, scratch_a, &d);
    k5_.backward(kupa_, d, &scratch_a);
    relu_backward(kupa_, scratch_a, scratch_b);
    bn_ku_.backward(kupc_, scratch_b, &d);
    kup_.backward(k4a_, d, &scratch_a);
    relu_backward(k4a_, scratch_a, scratch_b);
    bn_k4_.backward(k4c_, scratch_b, &d);
    k4_.backward(k3a_, d, &scratch_a);
    relu_backward(k3a_, scratch_a, scratch_b);
    bn_k3_.backward(k3c_, scratch_b, &d);
    k3_.backward(k2a_, d, &scratch_a);
    relu_backward(k2a_, scratch_a, scratch_b);
    bn_k2_.backward(k2c_, scratch_b, &d);
    k2_.backward(k1a_, d, &scratch_a);
    relu_backward(k1a_, scratch_a, scratch_b);
    bn_k1_.backward(k1c_, scratch_b, &d);
    Tensor d_in;
    k1_.backward(cat2_, d, &d_in);
    for (std::size_t i = 0; i < d_cat2.size(); ++i) d_cat2.v[i] += d_in.v[i];
  }

  // gesture / handedness branches meet at the shared GAP input
  if (d_gesture_logits || d_handedness_logit) {
    Tensor d_gap(gap_.n, gap_.c, 1, 1);
    if (d_gesture_logits) {
      Tensor d;
      fc_g2_.backward(gf1a_, *d_gesture_logits, &d);
      relu_backward(gf1a_, d, scratch_a);
      Tensor d_g;
      fc_g1_.backward(gap_, scratch_a, &d_g);
      for (std::size_t i = 0; i < d_gap.size(); ++i) d_gap.v[i] += d_g.v[i];
    }
    if (d_handedness_logit) {
      Tensor d_h;
      fc_h_.backward(gap_, *d_handedness_logit, &d_h);
      for (std::size_t i = 0; i < d_gap.size(); ++i) d_gap.v[i] += d_h.v[i];
    }
    Tensor d_s2a(s2a_.n, s2a_.c, s2a_.h, s2a_.w);
    global_avg_pool_backward(d_gap, d_s2a);
    Tensor d;
    relu_backward(s2a_, d_s2a, scratch_a);
    bn_s2_.backward(s2c_, scratch_a, &d);
    s2_.backward(s1a_, d, &scratch_a);
    relu_backward(s1a_, scratch_a, scratch_b);
    bn_s1_.backward(s1c_, scratch_b, &d);
    Tensor d_in;
    s1_.backward(cat2_, d, &d_in);
    for (std::size_t i = 0; i < d_cat2.size(); ++i) d_cat2.v[i] += d_in.v[i];
  }

  // trunk: split skip concatenations and walk the encoder back
  Tensor d_u2a(u2a_.n, u2a_.c, u2a_.h, u2a_.w);
  Tensor d_e3a(e3a_.n, e3a_.c, e3a_.h, e3a_.w);
  split_channels_add(d_cat2, d_u2a, d_e3a);

  Tensor d;
  relu_backward(u2a_, d_u2a, scratch_a);
  bn_u2_.backward(u2c_, scratch_a, &d);
  Tensor d_cat1;
  up2_.backward(cat1_, d, &d_cat1);

  Tensor d_u1a(u1a_.n, u1a_.c, u1a_.h, u1a_.w);
  Tensor d_e4a(e4a_.n, e4a_.c, e4a_.h, e4a_.w);
  split_channels_add(d_cat1, d_u1a, d_e4a);

  relu_backward(u1a_, d_u1a, scratch_a);
  bn_u1_.backward(u1c_, scratch_a, &d);
  Tensor d_e4p;
  up1_.backward(e4p_, d, &d_e4p);
  pool4_.backward(d_e4p, d_e4a);

  relu_backward(e4a_, d_e4a, scratch_a);
  bn_e4_.backward(e4c_, scratch_a, &d);
  Tensor d_e3p;
  e4_.backward(e3p_, d, &d_e3p);
  pool3_.backward(d_e3p, d_e3a);

  relu_backward(e3a_, d_e3a, scratch_a);
  bn_e3_.backward(e3c_, scratch_a, &d);
  Tensor d_e2p;
  e3_.backward(e2p_, d, &d_e2p);
  Tensor d_e2a(e2a_.n, e2a_.c, e2a_.h, e2a_.w);
  pool2_.backward(d_e2p, d_e2a);

  relu_backward(e2a_, d_e2a, scratch_a);
  bn_e2_.backward(e2c_, scratch_a, &d);
  Tensor d_e1p;
  e2_.backward(e1p_, d, &d_e1p);
  Tensor d_e1a(e1a_.n, e1a_.c, e1a_.h, e1a_.w);
  pool1_.backward(d_e1p, d_e1a);

  relu_backward(e1a_, d_e1a, scratch_a);
  bn_e1_.backward(e1c_, scratch_a, &d);
  e1_.backward(in_, d, nullptr);
}

void MultiTaskNet::zero_grads() {
  for (auto& p : param_refs_) p.param->zero_grad();
}

std::vector<StateRef> MultiTaskNet::states() {
  std::vector<StateRef> refs;
  auto add = [&](BatchNorm2d& bn, const std::string& name) {
    refs.push_back({&bn.running_mean, name + ".running_mean"});
    refs.push_back({&bn.running_var, name + ".running_var"});
  };
  add(bn_e1_, "bn_e1");
  add(bn_e2_, "bn_e2");
  add(bn_e3_, "bn_e3");
  add(bn_e4_, "bn_e4");
  add(bn_u1_, "bn_u1");
  add(bn_u2_, "bn_u2");
  add(bn_s1_, "bn_s1");
  add(bn_s2_, "bn_s2");
  add(bn_k1_, "bn_k1");
  add(bn_k2_, "bn_k2");
  add(bn_k3_, "bn_k3");
  add(bn_k4_, "bn_k4");
  add(bn_ku_, "bn_ku");
  add(bn_k5_, "bn_k5");
  return refs;
}

HeatmapStack to_heatmap_stack(const Tensor& heatmaps, int sample_idx) {
  HeatmapStack stack(heatmaps.h, heatmaps.c);
  const float* src = heatmaps.sample(sample_idx);
  std::memcpy(stack.values.data(), src, sizeof(float) * heatmaps.per_sample());
  return stack;
}

// ------------------------------------------------------------ checkpoints

namespace {

json network_config_to_json(const NetworkConfig& cfg) {
  json j;
  j["input_size"] = cfg.input_size;
  j["input_channels"] = cfg.input_channels;
  j["trunk_widths"] = cfg.trunk_widths;
  j["up_widths"] = cfg.up_widths;
  j["shared_widths"] = cfg.shared_widths;
  j["keypoint_widths"] = cfg.keypoint_widths;
  j["keypoint_up_width"] = cfg.keypoint_up_width;
  j["keypoint_penultimate_width"] = cfg.keypoint_penultimate_width;
  j["heatmap_channels"] = cfg.heatmap_channels;
  j["gesture_hidden"] = cfg.gesture_hidden;
  j["gesture_classes"] = cfg.gesture_classes;
  j["conv_init_gain"] = cfg.conv_init_gain;
  j["heatmap_head_gain"] = cfg.heatmap_head_gain;
  j["heatmap_head_bias"] = cfg.heatmap_head_bias;
  if (cfg.parameter_budget)
    j["parameter_budget"] = {cfg.parameter_budget->first, cfg.parameter_budget->second};
  else
    j["parameter_budget"] = nullptr;
  return j;
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig cfg;
  static const std::vector<std::string> known = {
      "input_size",       "input_channels", "trunk_widths",
      "up_widths",        "shared_widths",  "keypoint_widths",
      "keypoint_up_width", "keypoint_penultimate_width", "heatmap_channels",
      "gesture_hidden",   "gesture_classes", "conv_init_gain",
      "heatmap_head_gain", "heatmap_head_bias", "parameter_budget"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ModelError("unknown network config key: " + key);
  cfg.input_size = j.value("input_size", cfg.input_size);
  cfg.input_channels = j.value("input_channels", cfg.input_channels);
  if (j.contains("trunk_widths")) cfg.trunk_widths = j["trunk_widths"].get<std::array<int, 4>>();
  if (j.contains("up_widths")) cfg.up_widths = j["up_widths"].get<std::array<int, 2>>();
  if (j.contains("shared_widths"))
    cfg.shared_widths = j["shared_widths"].get<std::array<int, 2>>();
  if (j.contains("keypoint_widths"))
    cfg.keypoint_widths = j["keypoint_widths"].get<std::array<int, 4>>();
  cfg.keypoint_up_width = j.value("keypoint_up_width", cfg.keypoint_up_width);
  cfg.keypoint_penultimate_width =
      j.value("keypoint_penultimate_width", cfg.keypoint_penultimate_width);
  cfg.heatmap_channels = j.value("heatmap_channels", cfg.heatmap_channels);
  cfg.gesture_hidden = j.value("gesture_hidden", cfg.gesture_hidden);
  cfg.gesture_classes = j.value("gesture_classes", cfg.gesture_classes);
  cfg.conv_init_gain = j.value("conv_init_gain", cfg.conv_init_gain);
  cfg.heatmap_head_gain = j.value("heatmap_head_gain", cfg.heatmap_head_gain);
  cfg.heatmap_head_bias = j.value("heatmap_head_bias", cfg.heatmap_head_bias);
  if (j.contains("parameter_budget")) {
    if (j["parameter_budget"].is_null())
      cfg.parameter_budget.reset();
    else
      cfg.parameter_budget = std::pair{j["parameter_budget"][0].get<double>(),
                                       j["parameter_budget"][1].get<double>()};
  }
  return cfg;
}

constexpr char kCheckpointMagic[8] = {'T', 'H', 'N', 'D', 'C', 'K', 'P', 'T'};

}  // namespace

std::string network_config_to_json_text(const NetworkConfig& cfg) {
  return network_config_to_json(cfg).dump(2);
}

NetworkConfig network_config_from_json_text(const std::string& text) {
  return network_config_from_json(json::parse(text));
}

void save_checkpoint(MultiTaskNet& net, const GestureVocabulary& vocab, const LossWeights& weights,
                     const std::string& path) {
  json sidecar;
  sidecar["schema_version"] = kCheckpointSchemaVersion;
  sidecar["network"] = network_config_to_json(net.config());
  sidecar["vocabulary"] = json::parse(vocab.to_json_text());
  sidecar["loss_weights"] = {{"alpha", weights.alpha}, {"beta", weights.beta},
                             {"gamma", weights.gamma}};
  std::ofstream side(path + ".json");
  if (!side) throw ModelError("cannot write checkpoint sidecar: " + path + ".json");
  side << sidecar.dump(2) << "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t version = kCheckpointSchemaVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));

  auto write_blob = [&](const std::vector<float>& v) {
    const std::uint64_t size = v.size();
    out.write(reinterpret_cast<const char*>(&size), sizeof(size));
    out.write(reinterpret_cast<const char*>(v.data()), sizeof(float) * v.size());
  };
  for (const auto& p : net.params()) write_blob(p.param->value);
  for (const auto& s : net.states()) write_blob(*s.state);
  if (!out) throw ModelError("checkpoint write failed: " + path);
}

CheckpointBundle load_checkpoint(const std::string& path) {
  std::ifstream side_in(path + ".json");
  if (!side_in) throw ModelError("cannot read checkpoint sidecar: " + path + ".json");
  json sidecar = json::parse(side_in);
  const int version = sidecar.at("schema_version").get<int>();
  if (version != kCheckpointSchemaVersion)
    throw ModelError("checkpoint schema_version " + std::to_string(version) +
                     " does not match supported version " +
                     std::to_string(kCheckpointSchemaVersion));

  CheckpointBundle bundle;
  bundle.network = network_config_from_json(sidecar.at("network"));
  bundle.vocabulary = GestureVocabulary::from_json_text(sidecar.at("vocabulary").dump());
  bundle.loss_weights.alpha = sidecar.at("loss_weights").at("alpha").get<double>();
  bundle.loss_weights.beta = sidecar.at("loss_weights").at("beta").get<double>();
  bundle.loss_weights.gamma = sidecar.at("loss_weights").at("gamma").get<double>();
  bundle.net = std::make_unique<MultiTaskNet>(bundle.network);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw ModelError("not a checkpoint file: " + path);
  std::uint32_t bin_version = 0;
  in.read(reinterpret_cast<char*>(&bin_version), sizeof(bin_version));
  if (bin_version != kCheckpointSchemaVersion)
    throw ModelError("checkpoint binary version mismatch in " + path);

  auto read_blob = [&](std::vector<float>& v, const std::string& name) {
    std::uint64_t size = 0;
    in.read(reinterpret_cast<char*>(&size), sizeof(size));
    if (!in || size != v.size())
      throw ModelError("checkpoint blob size mismatch at " + name);
    in.read(reinterpret_cast<char*>(v.data()), sizeof(float) * size);
    if (!in) throw ModelError("checkpoint truncated at " + name);
  };
  for (auto& p : bundle.net->params()) read_blob(p.param->value, p.name);
  for (auto& s : bundle.net->states()) read_blob(*s.state, s.name);
  return bundle;
}

}  // namespace thermohand::net
