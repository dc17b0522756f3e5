#include "thermohand/net/tensor.hpp"

#include <cmath>

namespace thermohand::net {

std::string Tensor::shape_str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
         std::to_string(w);
}

bool Tensor::all_finite() const {
  for (float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_shape(const Tensor& t, int n, int c, int h, int w, const char* what) {
  if (t.n != n || t.c != c || t.h != h || t.w != w)
    throw ShapeError(std::string(what) + ": expected " + Tensor(n, c, h, w).shape_str() +
                     ", got " + t.shape_str());
}

}  // namespace thermohand::net
