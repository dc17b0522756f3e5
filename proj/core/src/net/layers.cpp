#include "thermohand/net/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Core>

namespace thermohand::net {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMat>;
using CMapRM = Eigen::Map<const RowMat>;

/// cols[(c*k+kh)*k+kw][cy*col_w+cx] = src[c][cy*stride - pad + kh][cx*stride - pad + kw] (or 0).
void im2col(const float* src, int channels, int src_h, int src_w, int k, int stride, int pad,
            int col_h, int col_w, float* cols) {
  const std::size_t plane = static_cast<size_t>(col_h) * col_w;
  for (int c = 0; c < channels; ++c) {
    const float* sp = src + static_cast<size_t>(c) * src_h * src_w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        float* row = cols + ((static_cast<size_t>(c) * k + kh) * k + kw) * plane;
        for (int cy = 0; cy < col_h; ++cy) {
          const int sy = cy * stride - pad + kh;
          float* dst = row + static_cast<size_t>(cy) * col_w;
          if (sy < 0 || sy >= src_h) {
            std::memset(dst, 0, sizeof(float) * col_w);
            continue;
          }
          const float* srow = sp + static_cast<size_t>(sy) * src_w;
          if (stride == 1) {
            const int x0 = std::max(0, pad - kw);                    // first valid cx
            const int x1 = std::min(col_w, src_w + pad - kw);        // one past last valid
            if (x0 > 0) std::memset(dst, 0, sizeof(float) * x0);
            if (x1 > x0) std::memcpy(dst + x0, srow + x0 - pad + kw, sizeof(float) * (x1 - x0));
            if (x1 < col_w) std::memset(dst + x1, 0, sizeof(float) * (col_w - x1));
          } else {
            for (int cx = 0; cx < col_w; ++cx) {
              const int sx = cx * stride - pad + kw;
              dst[cx] = (sx >= 0 && sx < src_w) ? srow[sx] : 0.0f;
            }
          }
        }
      }
    }
  }
}

/// dst[c][cy*stride - pad + kh][cx*stride - pad + kw] += cols[...][cy*col_w+cx].
void col2im_add(const float* cols, int channels, int col_h, int col_w, int k, int stride, int pad,
                float* dst, int dst_h, int dst_w) {
  const std::size_t plane = static_cast<size_t>(col_h) * col_w;
  for (int c = 0; c < channels; ++c) {
    float* dp = dst + static_cast<size_t>(c) * dst_h * dst_w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const float* row = cols + ((static_cast<size_t>(c) * k + kh) * k + kw) * plane;
        for (int cy = 0; cy < col_h; ++cy) {
          const int sy = cy * stride - pad + kh;
          if (sy < 0 || sy >= dst_h) continue;
          const float* srow = row + static_cast<size_t>(cy) * col_w;
          float* drow = dp + static_cast<size_t>(sy) * dst_w;
          for (int cx = 0; cx < col_w; ++cx) {
            const int sx = cx * stride - pad + kw;
            if (sx >= 0 && sx < dst_w) drow[sx] += srow[cx];
          }
        }
      }
    }
  }
}

void init_normal(std::vector<float>& v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (float& x : v) x = static_cast<float>(dist(rng));
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(ksize), stride_(stride), pad_(pad) {
  weight.init(static_cast<size_t>(out_ch) * in_ch * ksize * ksize);
  bias.init(out_ch);
}

void Conv2d::init_he(std::mt19937_64& rng, double gain) {
  init_normal(weight.value, gain * std::sqrt(2.0 / (static_cast<double>(in_ch_) * k_ * k_)), rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0f);
}

void Conv2d::forward(const Tensor& x, Tensor& y) {
  const int oh = out_dim(x.h), ow = out_dim(x.w);
  y.resize(x.n, out_ch_, oh, ow);
  const std::size_t kdim = static_cast<size_t>(in_ch_) * k_ * k_;
  cols_.resize(kdim * oh * ow);
  CMapRM wm(weight.value.data(), out_ch_, static_cast<Eigen::Index>(kdim));
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), in_ch_, x.h, x.w, k_, stride_, pad_, oh, ow, cols_.data());
    CMapRM cm(cols_.data(), static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(oh) * ow);
    MapRM ym(y.sample(i), out_ch_, static_cast<Eigen::Index>(oh) * ow);
    ym.noalias() = wm * cm;
    for (int c = 0; c < out_ch_; ++c) ym.row(c).array() += bias.value[c];
  }
}

void Conv2d::backward(const Tensor& x, const Tensor& gy, Tensor* gx) {
  const int oh = gy.h, ow = gy.w;
  const std::size_t kdim = static_cast<size_t>(in_ch_) * k_ * k_;
  cols_.resize(kdim * oh * ow);
  std::vector<float> dcols;
  if (gx) {
    gx->resize(x.n, in_ch_, x.h, x.w);
    dcols.resize(kdim * oh * ow);
  }
  CMapRM wm(weight.value.data(), out_ch_, static_cast<Eigen::Index>(kdim));
  MapRM gwm(weight.grad.data(), out_ch_, static_cast<Eigen::Index>(kdim));
  for (int i = 0; i < x.n; ++i) {
    CMapRM gym(gy.sample(i), out_ch_, static_cast<Eigen::Index>(oh) * ow);
    im2col(x.sample(i), in_ch_, x.h, x.w, k_, stride_, pad_, oh, ow, cols_.data());
    CMapRM cm(cols_.data(), static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(oh) * ow);
    gwm.noalias() += gym * cm.transpose();
    for (int c = 0; c < out_ch_; ++c) bias.grad[c] += gym.row(c).sum();
    if (gx) {
      MapRM dcm(dcols.data(), static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(oh) * ow);
      dcm.noalias() = wm.transpose() * gym;
      col2im_add(dcols.data(), in_ch_, oh, ow, k_, stride_, pad_, gx->sample(i), x.h, x.w);
    }
  }
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad,
                                 int out_pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(ksize), stride_(stride), pad_(pad), out_pad_(out_pad) {
  weight.init(static_cast<size_t>(in_ch) * out_ch * ksize * ksize);
  bias.init(out_ch);
}

void ConvTranspose2d::init_he(std::mt19937_64& rng, double gain) {
  init_normal(weight.value, gain * std::sqrt(2.0 / (static_cast<double>(in_ch_) * k_ * k_)), rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0f);
}

void ConvTranspose2d::forward(const Tensor& x, Tensor& y) {
  const int oh = out_dim(x.h), ow = out_dim(x.w);
  y.resize(x.n, out_ch_, oh, ow);
  const std::size_t kdim = static_cast<size_t>(out_ch_) * k_ * k_;
  cols_.resize(kdim * x.h * x.w);
  CMapRM wm(weight.value.data(), in_ch_, static_cast<Eigen::Index>(kdim));
  for (int i = 0; i < x.n; ++i) {
    CMapRM xm(x.sample(i), in_ch_, static_cast<Eigen::Index>(x.h) * x.w);
    MapRM cm(cols_.data(), static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(x.h) * x.w);
    cm.noalias() = wm.transpose() * xm;
    float* out = y.sample(i);
    std::memset(out, 0, sizeof(float) * y.per_sample());
    col2im_add(cols_.data(), out_ch_, x.h, x.w, k_, stride_, pad_, out, oh, ow);
    MapRM ym(out, out_ch_, static_cast<Eigen::Index>(oh) * ow);
    for (int c = 0; c < out_ch_; ++c) ym.row(c).array() += bias.value[c];
  }
}

void ConvTranspose2d::backward(const Tensor& x, const Tensor& gy, Tensor* gx) {
  const std::size_t kdim = static_cast<size_t>(out_ch_) * k_ * k_;
  cols_.resize(kdim * x.h * x.w);
  if (gx) gx->resize(x.n, in_ch_, x.h, x.w);
  CMapRM wm(weight.value.data(), in_ch_, static_cast<Eigen::Index>(kdim));
  MapRM gwm(weight.grad.data(), in_ch_, static_cast<Eigen::Index>(kdim));
  for (int i = 0; i < x.n; ++i) {
    // Gathering gy through the conv geometry turns transposed-conv backward
    // into plain GEMMs against the same column matrix.
    im2col(gy.sample(i), out_ch_, gy.h, gy.w, k_, stride_, pad_, x.h, x.w, cols_.data());
    CMapRM cm(cols_.data(), static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(x.h) * x.w);
    CMapRM xm(x.sample(i), in_ch_, static_cast<Eigen::Index>(x.h) * x.w);
    gwm.noalias() += xm * cm.transpose();
    CMapRM gym(gy.sample(i), out_ch_, static_cast<Eigen::Index>(gy.h) * gy.w);
    for (int c = 0; c < out_ch_; ++c) bias.grad[c] += gym.row(c).sum();
    if (gx) {
      MapRM gxm(gx->sample(i), in_ch_, static_cast<Eigen::Index>(x.h) * x.w);
      gxm.noalias() = wm * cm;
    }
  }
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, double eps, double momentum)
    : ch_(channels), eps_(eps), momentum_(momentum) {
  gamma.init(channels);
  beta.init(channels);
  std::fill(gamma.value.begin(), gamma.value.end(), 1.0f);
  running_mean.assign(channels, 0.0f);
  running_var.assign(channels, 1.0f);
  mean_.assign(channels, 0.0f);
  istd_.assign(channels, 1.0f);
}

void BatchNorm2d::forward(const Tensor& x, Tensor& y, Mode mode) {
  y.resize(x.n, x.c, x.h, x.w);
  const std::size_t plane = static_cast<size_t>(x.h) * x.w;
  const double m = static_cast<double>(x.n) * plane;

  for (int c = 0; c < ch_; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const float* p = x.sample(i) + c * plane;
        for (std::size_t j = 0; j < plane; ++j) {
          sum += p[j];
          sq += static_cast<double>(p[j]) * p[j];
        }
      }
      mean = sum / m;
      var = std::max(0.0, sq / m - mean * mean);
      running_mean[c] = static_cast<float>((1.0 - momentum_) * running_mean[c] + momentum_ * mean);
      running_var[c] = static_cast<float>((1.0 - momentum_) * running_var[c] + momentum_ * var);
      mean_[c] = static_cast<float>(mean);
      istd_[c] = static_cast<float>(1.0 / std::sqrt(var + eps_));
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const float mu = static_cast<float>(mean);
    const float istd = static_cast<float>(1.0 / std::sqrt(var + eps_));
    const float g = gamma.value[c], b = beta.value[c];
    for (int i = 0; i < x.n; ++i) {
      const float* p = x.sample(i) + c * plane;
      float* q = y.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) q[j] = g * (p[j] - mu) * istd + b;
    }
  }
}

void BatchNorm2d::backward(const Tensor& x, const Tensor& gy, Tensor* gx) {
  const std::size_t plane = static_cast<size_t>(x.h) * x.w;
  const double m = static_cast<double>(x.n) * plane;
  if (gx) gx->resize(x.n, x.c, x.h, x.w);

  for (int c = 0; c < ch_; ++c) {
    const float mu = mean_[c], istd = istd_[c];
    double dg = 0.0, db = 0.0;
    for (int i = 0; i < x.n; ++i) {
      const float* xp = x.sample(i) + c * plane;
      const float* gp = gy.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        dg += gp[j] * (xp[j] - mu) * istd;
        db += gp[j];
      }
    }
    gamma.grad[c] += static_cast<float>(dg);
    beta.grad[c] += static_cast<float>(db);
    if (gx) {
      const float g = gamma.value[c];
      const float k = static_cast<float>(g * istd / m);
      for (int i = 0; i < x.n; ++i) {
        const float* xp = x.sample(i) + c * plane;
        const float* gp = gy.sample(i) + c * plane;
        float* op = gx->sample(i) + c * plane;
        for (std::size_t j = 0; j < plane; ++j) {
          const float xhat = (xp[j] - mu) * istd;
          op[j] = k * (static_cast<float>(m) * gp[j] - static_cast<float>(db) -
                       xhat * static_cast<float>(dg));
        }
      }
    }
  }
}

// ------------------------------------------------------------- MaxPool2d

void MaxPool2d::forward(const Tensor& x, Tensor& y) {
  const int oh = x.h / 2, ow = x.w / 2;
  y.resize(x.n, x.c, oh, ow);
  argmax_.resize(y.size());
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      const float* xp = x.sample(i) + static_cast<size_t>(c) * x.h * x.w;
      float* yp = y.sample(i) + static_cast<size_t>(c) * oh * ow;
      std::int32_t* am = argmax_.data() + (static_cast<size_t>(i) * x.c + c) * oh * ow;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          // Row-major first occurrence wins ties.
          int best = (2 * oy) * x.w + 2 * ox;
          float bv = xp[best];
          const int candidates[3] = {(2 * oy) * x.w + 2 * ox + 1, (2 * oy + 1) * x.w + 2 * ox,
                                     (2 * oy + 1) * x.w + 2 * ox + 1};
          for (int cand : candidates) {
            if (xp[cand] > bv) {
              bv = xp[cand];
              best = cand;
            }
          }
          yp[oy * ow + ox] = bv;
          am[oy * ow + ox] = best;
        }
      }
    }
  }
}

void MaxPool2d::backward(const Tensor& gy, Tensor& gx) {
  for (int i = 0; i < gy.n; ++i) {
    for (int c = 0; c < gy.c; ++c) {
      const float* gp = gy.sample(i) + static_cast<size_t>(c) * gy.h * gy.w;
      float* op = gx.sample(i) + static_cast<size_t>(c) * gx.h * gx.w;
      const std::int32_t* am = argmax_.data() + (static_cast<size_t>(i) * gy.c + c) * gy.h * gy.w;
      const std::size_t cells = static_cast<size_t>(gy.h) * gy.w;
      for (std::size_t j = 0; j < cells; ++j) op[am[j]] += gp[j];
    }
  }
}

// ----------------------------------------------------------------- Dense

Dense::Dense(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
  weight.init(static_cast<size_t>(out_dim) * in_dim);
  bias.init(out_dim);
}

void Dense::init_he(std::mt19937_64& rng, double gain) {
  init_normal(weight.value, gain * std::sqrt(2.0 / in_), rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0f);
}

void Dense::forward(const Tensor& x, Tensor& y) {
  y.resize(x.n, out_, 1, 1);
  CMapRM xm(x.v.data(), x.n, in_);
  CMapRM wm(weight.value.data(), out_, in_);
  MapRM ym(y.v.data(), x.n, out_);
  ym.noalias() = xm * wm.transpose();
  for (int c = 0; c < out_; ++c) ym.col(c).array() += bias.value[c];
}

void Dense::backward(const Tensor& x, const Tensor& gy, Tensor* gx) {
  CMapRM xm(x.v.data(), x.n, in_);
  CMapRM gym(gy.v.data(), x.n, out_);
  MapRM gwm(weight.grad.data(), out_, in_);
  gwm.noalias() += gym.transpose() * xm;
  for (int c = 0; c < out_; ++c) bias.grad[c] += gym.col(c).sum();
  if (gx) {
    gx->resize(x.n, in_, 1, 1);
    CMapRM wm(weight.value.data(), out_, in_);
    MapRM gxm(gx->v.data(), x.n, in_);
    gxm.noalias() = gym * wm;
  }
}

// ----------------------------------------------------------- activations

void relu_forward(const Tensor& x, Tensor& y) {
  y.resize(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > 0.0f ? x.v[i] : 0.0f;
}

void relu_backward(const Tensor& y, const Tensor& gy, Tensor& gx) {
  gx.resize(y.n, y.c, y.h, y.w);
  for (std::size_t i = 0; i < y.size(); ++i) gx.v[i] = y.v[i] > 0.0f ? gy.v[i] : 0.0f;
}

void sigmoid_forward(const Tensor& x, Tensor& y) {
  y.resize(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = 1.0f / (1.0f + std::exp(-x.v[i]));
}

void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx) {
  gx.resize(y.n, y.c, y.h, y.w);
  for (std::size_t i = 0; i < y.size(); ++i) gx.v[i] = gy.v[i] * y.v[i] * (1.0f - y.v[i]);
}

void softmax_forward(const Tensor& x, Tensor& y) {
  y.resize(x.n, x.c, 1, 1);
  for (int i = 0; i < x.n; ++i) {
    const float* xp = x.sample(i);
    float* yp = y.sample(i);
    float mx = xp[0];
    for (int c = 1; c < x.c; ++c) mx = std::max(mx, xp[c]);
    double sum = 0.0;
    for (int c = 0; c < x.c; ++c) {
      yp[c] = std::exp(xp[c] - mx);
      sum += yp[c];
    }
    for (int c = 0; c < x.c; ++c) yp[c] = static_cast<float>(yp[c] / sum);
  }
}

void global_avg_pool_forward(const Tensor& x, Tensor& y) {
  y.resize(x.n, x.c, 1, 1);
  const std::size_t plane = static_cast<size_t>(x.h) * x.w;
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      const float* p = x.sample(i) + c * plane;
      double sum = 0.0;
      for (std::size_t j = 0; j < plane; ++j) sum += p[j];
      y.sample(i)[c] = static_cast<float>(sum / plane);
    }
  }
}

void global_avg_pool_backward(const Tensor& gy, Tensor& gx) {
  const std::size_t plane = static_cast<size_t>(gx.h) * gx.w;
  for (int i = 0; i < gy.n; ++i) {
    for (int c = 0; c < gy.c; ++c) {
      const float g = gy.sample(i)[c] / static_cast<float>(plane);
      float* p = gx.sample(i) + c * plane;
      for (std::size_t j = 0; j < plane; ++j) p[j] += g;
    }
  }
}

void concat_channels(const Tensor& a, const Tensor& b, Tensor& out) {
  out.resize(a.n, a.c + b.c, a.h, a.w);
  const std::size_t pa = a.per_sample(), pb = b.per_sample();
  for (int i = 0; i < a.n; ++i) {
    std::memcpy(out.sample(i), a.sample(i), sizeof(float) * pa);
    std::memcpy(out.sample(i) + pa, b.sample(i), sizeof(float) * pb);
  }
}

void split_channels_add(const Tensor& gout, Tensor& ga, Tensor& gb) {
  const std::size_t pa = ga.per_sample(), pb = gb.per_sample();
  for (int i = 0; i < gout.n; ++i) {
    const float* src = gout.sample(i);
    float* ap = ga.sample(i);
    float* bp = gb.sample(i);
    for (std::size_t j = 0; j < pa; ++j) ap[j] += src[j];
    for (std::size_t j = 0; j < pb; ++j) bp[j] += src[pa + j];
  }
}

}  // namespace thermohand::net
