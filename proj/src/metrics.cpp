#include "dscjscc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dscjscc {

double mse_loss(const Tensor4& x, const Tensor4& y) {
  require_same_shape("mse_loss", x.shape(), y.shape());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.shape().n);
}

double mean_squared_error(const Tensor4& x, const Tensor4& y) {
  require_same_shape("mean_squared_error", x.shape(), y.shape());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double psnr_from_mse(double mse, double cap) {
  if (mse <= 0.0) return cap;
  return std::min(cap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double psnr(const Tensor4& x, const Tensor4& y, double cap) {
  return psnr_from_mse(mean_squared_error(x, y), cap);
}

}  // namespace dscjscc
