#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dscjscc/error.hpp"

namespace dscjscc {

class Rng;

// (batch, channels, height, width)
struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return n * c * h * w; }
  bool all_positive() const { return n > 0 && c > 0 && h > 0 && w > 0; }
  std::string str() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

// Dense real tensor in row-major N-C-H-W order.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> data);

  static Tensor4 uniform(Shape4 shape, Rng& rng, double lo, double hi);
  static Tensor4 normal(Shape4 shape, Rng& rng, double stddev = 1.0);

  const Shape4& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[index(n, c, h, w)];
  }
  double operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[index(n, c, h, w)];
  }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  // Contiguous view of one (n, c) plane.
  std::span<double> plane(std::size_t n, std::size_t c) {
    return std::span<double>(data_).subspan(index(n, c, 0, 0), shape_.h * shape_.w);
  }
  std::span<const double> plane(std::size_t n, std::size_t c) const {
    return std::span<const double>(data_).subspan(index(n, c, 0, 0), shape_.h * shape_.w);
  }

  // One batch item as a contiguous C*H*W span.
  std::span<double> item(std::size_t n) {
    return std::span<double>(data_).subspan(n * shape_.c * shape_.h * shape_.w, shape_.c * shape_.h * shape_.w);
  }
  std::span<const double> item(std::size_t n) const {
    return std::span<const double>(data_).subspan(n * shape_.c * shape_.h * shape_.w,
                                                  shape_.c * shape_.h * shape_.w);
  }

  Tensor4& operator+=(const Tensor4& other);
  Tensor4& operator*=(double scale);

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

double dot(const Tensor4& a, const Tensor4& b);
double sum(const Tensor4& t);
double max_abs(const Tensor4& t);
double max_abs_diff(const Tensor4& a, const Tensor4& b);

// Throws ShapeError naming the first differing dimension.
void require_same_shape(const std::string& op, const Shape4& expected, const Shape4& actual);

}  // namespace dscjscc
