#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dscjscc/tensor.hpp"

namespace dscjscc {

// Learnable contents of one convolution.
//
// Layouts:
//   standard conv         (Cout, Cin, K, K)
//   depthwise (any kind)  (C, 1, K, K)
//   transposed conv       (Cin, Cout, K, K)
//
// The transposed layout is the one that makes tconv2d the adjoint of conv2d
// for the same kernel tensor.
struct ConvKernel {
  Tensor4 weights;
  std::optional<std::vector<double>> bias;
};

std::size_t conv_output_size(std::size_t in, std::size_t kernel, int stride, int padding);
std::size_t tconv_output_size(std::size_t in, std::size_t kernel, int stride, int padding, int output_padding);

// Cross-correlation, no kernel flip.
Tensor4 conv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding);
Tensor4 depthwise_conv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding);
Tensor4 pointwise_conv2d(const Tensor4& input, const ConvKernel& kernel);
Tensor4 tconv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding, int output_padding);
Tensor4 depthwise_tconv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding,
                          int output_padding);

Tensor4 prelu(const Tensor4& input, std::span<const double> slopes);
Tensor4 sigmoid(const Tensor4& input);

// Grouped convolution kernels shared by the forward ops and the reverse pass.
// `weights` is (Cout, Cin/groups, K, K); an empty bias means no bias.
namespace kernels {

Tensor4 conv_forward(const Tensor4& input, const Tensor4& weights, std::span<const double> bias, int stride,
                     int padding, std::size_t groups);

// Gradient of conv_forward with respect to its input; also the transposed
// convolution forward pass when out_h/out_w follow tconv_output_size.
Tensor4 conv_input_grad(const Tensor4& grad_out, const Tensor4& weights, int stride, int padding,
                        std::size_t groups, std::size_t out_h, std::size_t out_w);

Tensor4 conv_weight_grad(const Tensor4& input, const Tensor4& grad_out, int stride, int padding,
                         std::size_t groups, std::size_t kernel);

// Per-channel sum over batch and space (bias gradient).
std::vector<double> channel_sum(const Tensor4& grad_out);

void add_channel_bias(Tensor4& t, std::span<const double> bias);

}  // namespace kernels

}  // namespace dscjscc
