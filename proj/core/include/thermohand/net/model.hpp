#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thermohand/heatmap.hpp"
#include "thermohand/net/layers.hpp"
#include "thermohand/net/tensor.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand::net {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Architecture widths. The default configuration lands inside the parameter
/// budget; desk_scale() trades width for CPU training speed.
struct NetworkConfig {
  int input_size = 100;
  int input_channels = 1;
  std::array<int, 4> trunk_widths{64, 128, 256, 512};   // encoder stages, 100/50/25/12
  std::array<int, 2> up_widths{256, 128};               // decoder stages, 12/25
  std::array<int, 2> shared_widths{128, 128};           // gesture+handedness shared convs
  std::array<int, 4> keypoint_widths{128, 128, 64, 64}; // keypoint convs at 25x25
  int keypoint_up_width = 64;                           // after up-conv to 50x50
  int keypoint_penultimate_width = 32;
  int heatmap_channels = 6;
  int gesture_hidden = 512;
  int gesture_classes = 10;
  /// Multiplier on the He-init standard deviation of batch-normalized conv
  /// layers. BN makes the forward pass invariant to this scale while the
  /// effective learning rate grows as 1/gain^2, so short-budget runs train
  /// faster with gain < 1.
  double conv_init_gain = 1.0;
  /// Fixed (non-trainable) output multiplier on the heatmap head's final
  /// convolution, with the weight init scaled by 1/gain so initial outputs
  /// are unchanged. Accelerates pre-sigmoid output movement per SGD step for
  /// short-budget runs; 1.0 is the plain parameterization.
  double heatmap_head_gain = 1.0;
  /// Initial output level of the heatmap head. Targets are mostly zeros, so
  /// 0 starts the regression at the background optimum.
  double heatmap_head_bias = 0.0;
  /// [min, max] trainable-parameter budget enforced at build; disabled if empty.
  std::optional<std::pair<double, double>> parameter_budget = std::pair{5.0e6, 7.5e6};

  static NetworkConfig desk_scale();
  bool operator==(const NetworkConfig&) const = default;
};

struct ModelOutputs {
  Tensor gesture_probs;    // N x classes, softmax
  Tensor handedness_prob;  // N x 1, sigmoid
  Tensor heatmaps;         // N x 6 x 50 x 50, linear regression output
};

enum class Segment { Trunk, SharedGH, GestureHead, HandednessHead, KeypointHead };

struct ParamRef {
  Param* param;
  Segment segment;
  std::string name;
};

struct StateRef {
  std::vector<float>* state;
  std::string name;
};

/// Which loss branches propagate gradients / receive updates.
struct BranchMask {
  bool gesture = true;
  bool handedness = true;
  bool keypoints = true;

  bool segment_active(Segment s) const {
    switch (s) {
      case Segment::Trunk: return gesture || handedness || keypoints;
      case Segment::SharedGH: return gesture || handedness;
      case Segment::GestureHead: return gesture;
      case Segment::HandednessHead: return handedness;
      case Segment::KeypointHead: return keypoints;
    }
    return true;
  }
};

/// The shared encoder-decoder trunk with gesture, handedness, and keypoint
/// branches. Forward caches activations; backward() must follow the forward
/// it differentiates.
class MultiTaskNet {
 public:
  explicit MultiTaskNet(const NetworkConfig& cfg);

  void init_params(std::uint64_t seed);

  /// Input must be N x 1 x 100 x 100 with values in [0, 1].
  const ModelOutputs& forward(const Tensor& input, Mode mode);

  /// Gradients w.r.t. the pre-activation outputs (gesture logits, handedness
  /// logit, heatmap logits). Null pointers skip that branch entirely.
  void backward(const Tensor* d_gesture_logits, const Tensor* d_handedness_logit,
                const Tensor* d_heatmap_logits);

  void zero_grads();
  const std::vector<ParamRef>& params() { return param_refs_; }
  std::vector<StateRef> states();
  std::int64_t parameter_count() const;

  const NetworkConfig& config() const { return cfg_; }
  const ModelOutputs& outputs() const { return out_; }

 private:
  void wire_params();
  void check_budget() const;

  NetworkConfig cfg_;

  // trunk
  Conv2d e1_, e2_, e3_, e4_;
  BatchNorm2d bn_e1_, bn_e2_, bn_e3_, bn_e4_;
  MaxPool2d pool1_, pool2_, pool3_, pool4_;
  ConvTranspose2d up1_, up2_;
  BatchNorm2d bn_u1_, bn_u2_;
  // shared gesture/handedness convs
  Conv2d s1_, s2_;
  BatchNorm2d bn_s1_, bn_s2_;
  // heads
  Dense fc_g1_, fc_g2_, fc_h_;
  Conv2d k1_, k2_, k3_, k4_, k5_, k6_;
  BatchNorm2d bn_k1_, bn_k2_, bn_k3_, bn_k4_, bn_ku_, bn_k5_;
  ConvTranspose2d kup_;

  // cached activations (named after the layer that produced them)
  Tensor in_;
  Tensor e1c_, e1a_, e1p_, e2c_, e2a_, e2p_, e3c_, e3a_, e3p_, e4c_, e4a_, e4p_;
  Tensor e1b_, e2b_, e3b_, e4b_;
  Tensor u1c_, u1b_, u1a_, cat1_, u2c_, u2b_, u2a_, cat2_;
  Tensor s1c_, s1b_, s1a_, s2c_, s2b_, s2a_;
  Tensor gap_;
  Tensor gf1_, gf1a_, glogits_;
  Tensor hlogit_;
  Tensor k1c_, k1b_, k1a_, k2c_, k2b_, k2a_, k3c_, k3b_, k3a_, k4c_, k4b_, k4a_;
  Tensor kupc_, kupb_, kupa_, k5c_, k5b_, k5a_, k6c_;
  ModelOutputs out_;

  std::vector<ParamRef> param_refs_;
};

/// Extracts the sample_idx-th heatmap stack from a model output tensor.
HeatmapStack to_heatmap_stack(const Tensor& heatmaps, int sample_idx);

struct LossWeights {
  double alpha = 0.77;  // keypoints
  double beta = 0.15;   // gesture
  double gamma = 0.08;  // handedness
};

struct CheckpointBundle {
  std::unique_ptr<MultiTaskNet> net;
  NetworkConfig network;
  GestureVocabulary vocabulary = GestureVocabulary::default_vocabulary();
  LossWeights loss_weights;
};

constexpr int kCheckpointSchemaVersion = 1;

/// Binary parameter blob at `path` plus a JSON sidecar at `path + ".json"`
/// recording the schema version, network config, vocabulary, and loss
/// weights. load(save(m)) reproduces bit-identical inference outputs.
void save_checkpoint(MultiTaskNet& net, const GestureVocabulary& vocab, const LossWeights& weights,
                     const std::string& path);
CheckpointBundle load_checkpoint(const std::string& path);

/// JSON text (de)serialization shared by run configs and checkpoint sidecars.
std::string network_config_to_json_text(const NetworkConfig& cfg);
NetworkConfig network_config_from_json_text(const std::string& text);

}  // namespace thermohand::net
