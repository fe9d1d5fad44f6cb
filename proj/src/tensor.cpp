#include "dscjscc/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "dscjscc/rng.hpp"

namespace dscjscc {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("Tensor4", "data length", shape_.size(), data_.size());
  }
}

Tensor4 Tensor4::uniform(Shape4 shape, Rng& rng, double lo, double hi) {
  Tensor4 t(shape);
  for (auto& v : t.data_) v = rng.uniform(lo, hi);
  return t;
}

Tensor4 Tensor4::normal(Shape4 shape, Rng& rng, double stddev) {
  Tensor4 t(shape);
  for (auto& v : t.data_) v = stddev * rng.normal();
  return t;
}

Tensor4& Tensor4::operator+=(const Tensor4& other) {
  require_same_shape("Tensor4::operator+=", shape_, other.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor4& Tensor4::operator*=(double scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

double dot(const Tensor4& a, const Tensor4& b) {
  require_same_shape("dot", a.shape(), b.shape());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Tensor4& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v;
  return acc;
}

double max_abs(const Tensor4& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
  require_same_shape("max_abs_diff", a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_same_shape(const std::string& op, const Shape4& expected, const Shape4& actual) {
  if (expected.n != actual.n) throw ShapeError(op, "batch", expected.n, actual.n);
  if (expected.c != actual.c) throw ShapeError(op, "channels", expected.c, actual.c);
  if (expected.h != actual.h) throw ShapeError(op, "height", expected.h, actual.h);
  if (expected.w != actual.w) throw ShapeError(op, "width", expected.w, actual.w);
}

}  // namespace dscjscc
