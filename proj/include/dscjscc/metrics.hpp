#pragma once

#include "dscjscc/tensor.hpp"

namespace dscjscc {

inline constexpr double kPsnrCap = 100.0;

// (1/N) * sum_l ||x_l - y_l||^2: per-sample sum of squares, averaged over the batch.
double mse_loss(const Tensor4& x, const Tensor4& y);

// Mean over all elements of (x - y)^2.
double mean_squared_error(const Tensor4& x, const Tensor4& y);

// 10 log10(255^2 / per-pixel MSE) for images in [0,255]. Identical images
// return `cap`, and larger values are clamped to it.
double psnr(const Tensor4& x, const Tensor4& y, double cap = kPsnrCap);
double psnr_from_mse(double mse, double cap = kPsnrCap);

}  // namespace dscjscc
