#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "thermohand/net/tensor.hpp"

namespace thermohand::net {

/// Trainable parameter blob with its gradient accumulator.
struct Param {
  std::vector<float> value;
  std::vector<float> grad;

  void init(std::size_t size) {
    value.assign(size, 0.0f);
    grad.assign(size, 0.0f);
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }
};

enum class Mode { Train, Eval };

/// 2D convolution, square kernel, implemented as im2col + GEMM.
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int ksize = 3, int stride = 1, int pad = 1);

  void forward(const Tensor& x, Tensor& y);
  /// Accumulates into weight/bias grads; writes dL/dx into gx unless null.
  void backward(const Tensor& x, const Tensor& gy, Tensor* gx);

  void init_he(std::mt19937_64& rng, double gain = 1.0);
  int out_dim(int in_dim) const { return (in_dim + 2 * pad_ - k_) / stride_ + 1; }

  Param weight;  // [out_ch][in_ch*k*k]
  Param bias;    // [out_ch]
  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }

 private:
  int in_ch_, out_ch_, k_, stride_, pad_;
  std::vector<float> cols_;  // im2col scratch
};

/// Transposed 2D convolution (stride-2 upsampling in this project).
/// out = (in - 1) * stride - 2 * pad + k + out_pad.
class ConvTranspose2d {
 public:
  ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad, int out_pad);

  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& x, const Tensor& gy, Tensor* gx);

  void init_he(std::mt19937_64& rng, double gain = 1.0);
  int out_dim(int in_dim) const { return (in_dim - 1) * stride_ - 2 * pad_ + k_ + out_pad_; }

  Param weight;  // [in_ch][out_ch*k*k]
  Param bias;    // [out_ch]

 private:
  int in_ch_, out_ch_, k_, stride_, pad_, out_pad_;
  std::vector<float> cols_;
};

/// Batch normalization over (N, H, W) per channel. Train mode uses biased
/// batch statistics and updates the running estimates; eval mode normalizes
/// with the running estimates. backward() must follow the forward() whose
/// statistics it needs.
class BatchNorm2d {
 public:
  explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1);

  void forward(const Tensor& x, Tensor& y, Mode mode);
  void backward(const Tensor& x, const Tensor& gy, Tensor* gx);

  Param gamma, beta;
  std::vector<float> running_mean, running_var;  // state, not trainable

 private:
  int ch_;
  double eps_, momentum_;
  std::vector<float> mean_, istd_;  // cached batch statistics
};

/// 2x2 max pooling with floor semantics (odd trailing row/col dropped).
class MaxPool2d {
 public:
  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& gy, Tensor& gx);  // gx must be pre-sized and zeroed

 private:
  std::vector<std::int32_t> argmax_;  // input linear index per output cell
};

class Dense {
 public:
  Dense(int in_dim, int out_dim);

  void forward(const Tensor& x, Tensor& y);
  void backward(const Tensor& x, const Tensor& gy, Tensor* gx);

  void init_he(std::mt19937_64& rng, double gain = 1.0);

  Param weight;  // [out][in]
  Param bias;    // [out]
  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  int in_, out_;
};

void relu_forward(const Tensor& x, Tensor& y);
void relu_backward(const Tensor& y, const Tensor& gy, Tensor& gx);

void sigmoid_forward(const Tensor& x, Tensor& y);
void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx);

/// Row-wise softmax over the channel dimension of an (N, C, 1, 1) tensor.
void softmax_forward(const Tensor& x, Tensor& y);

void global_avg_pool_forward(const Tensor& x, Tensor& y);
void global_avg_pool_backward(const Tensor& gy, Tensor& gx);

/// Channel concatenation [a | b] and the matching gradient split (adds into
/// ga/gb slices).
void concat_channels(const Tensor& a, const Tensor& b, Tensor& out);
void split_channels_add(const Tensor& gout, Tensor& ga, Tensor& gb);

}  // namespace thermohand::net
