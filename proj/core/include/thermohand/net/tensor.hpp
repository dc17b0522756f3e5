#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermohand::net {

/// Dense float32 activation tensor, NCHW row-major. Vectors/logits use
/// h = w = 1.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

  void resize(int n_, int c_, int h_, int w_) {
    n = n_;
    c = c_;
    h = h_;
    w = w_;
    v.assign(static_cast<size_t>(n) * c * h * w, 0.0f);
  }
  void zero() { std::fill(v.begin(), v.end(), 0.0f); }

  std::size_t size() const { return v.size(); }
  std::size_t per_sample() const { return static_cast<size_t>(c) * h * w; }

  float* sample(int i) { return v.data() + static_cast<size_t>(i) * per_sample(); }
  const float* sample(int i) const { return v.data() + static_cast<size_t>(i) * per_sample(); }

  float& at(int ni, int ci, int yi, int xi) {
    return v[((static_cast<size_t>(ni) * c + ci) * h + yi) * w + xi];
  }
  float at(int ni, int ci, int yi, int xi) const {
    return v[((static_cast<size_t>(ni) * c + ci) * h + yi) * w + xi];
  }

  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
  std::string shape_str() const;
  bool all_finite() const;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check_shape(const Tensor& t, int n, int c, int h, int w, const char* what);

}  // namespace thermohand::net
