#include "dscjscc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dscjscc {

namespace {

void check_hyper(const char* op, int stride, int padding) {
  if (stride < 1) throw ShapeError(std::string(op) + ": stride must be >= 1, got " + std::to_string(stride));
  if (padding < 0) throw ShapeError(std::string(op) + ": padding must be >= 0, got " + std::to_string(padding));
}

void check_layer_input(const char* op, const Tensor4& input) {
  if (!input.shape().all_positive()) {
    throw ShapeError(std::string(op) + ": input shape " + input.shape().str() + " has an empty dimension");
  }
}

void check_square_kernel(const char* op, const Tensor4& w) {
  if (!w.shape().all_positive()) throw ShapeError(std::string(op) + ": kernel shape " + w.shape().str() + " is empty");
  if (w.shape().h != w.shape().w) throw ShapeError(op, "kernel width", w.shape().h, w.shape().w);
}

void check_bias(const char* op, const ConvKernel& k, std::size_t channels) {
  if (k.bias && k.bias->size() != channels) throw ShapeError(op, "bias length", channels, k.bias->size());
}

std::span<const double> bias_span(const ConvKernel& k) {
  return k.bias ? std::span<const double>(*k.bias) : std::span<const double>();
}

// Output columns ow for which iw = ow*stride + kw - padding lies in [0, in_w).
struct ColumnRange {
  std::size_t lo;
  std::size_t hi;  // exclusive
};

ColumnRange valid_columns(std::size_t out_w, std::size_t in_w, int stride, int padding, std::size_t kw) {
  const long off = static_cast<long>(kw) - padding;
  long lo = 0;
  if (off < 0) lo = (-off + stride - 1) / stride;
  const long last_in = static_cast<long>(in_w) - 1 - off;
  long hi = last_in < 0 ? 0 : last_in / stride + 1;
  hi = std::min<long>(hi, static_cast<long>(out_w));
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, int stride, int padding) {
  const long span = static_cast<long>(in) + 2L * padding - static_cast<long>(kernel);
  if (span < 0) {
    throw ShapeError("conv: kernel " + std::to_string(kernel) + " larger than padded input " +
                     std::to_string(in + 2 * static_cast<std::size_t>(padding)));
  }
  return static_cast<std::size_t>(span / stride) + 1;
}

std::size_t tconv_output_size(std::size_t in, std::size_t kernel, int stride, int padding, int output_padding) {
  const long out = (static_cast<long>(in) - 1) * stride - 2L * padding + static_cast<long>(kernel) + output_padding;
  if (out < 1) throw ShapeError("tconv: non-positive output size " + std::to_string(out));
  return static_cast<std::size_t>(out);
}

namespace kernels {

Tensor4 conv_forward(const Tensor4& input, const Tensor4& weights, std::span<const double> bias, int stride,
                     int padding, std::size_t groups) {
  const auto& is = input.shape();
  const auto& ws = weights.shape();
  const std::size_t cin_g = ws.c;
  const std::size_t cout = ws.n;
  const std::size_t cout_g = cout / groups;
  const std::size_t k = ws.h;
  const std::size_t oh_n = conv_output_size(is.h, k, stride, padding);
  const std::size_t ow_n = conv_output_size(is.w, k, stride, padding);

  Tensor4 out({is.n, cout, oh_n, ow_n});
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      auto dst = out.plane(n, oc);
      if (!bias.empty()) std::fill(dst.begin(), dst.end(), bias[oc]);
      const std::size_t g = oc / cout_g;
      for (std::size_t icg = 0; icg < cin_g; ++icg) {
        const auto src = input.plane(n, g * cin_g + icg);
        for (std::size_t kh = 0; kh < k; ++kh) {
          for (std::size_t kw = 0; kw < k; ++kw) {
            const double wv = weights(oc, icg, kh, kw);
            const ColumnRange cols = valid_columns(ow_n, is.w, stride, padding, kw);
            for (std::size_t oh = 0; oh < oh_n; ++oh) {
              const long ih = static_cast<long>(oh * stride + kh) - padding;
              if (ih < 0 || ih >= static_cast<long>(is.h)) continue;
              double* orow = dst.data() + oh * ow_n;
              const double* irow = src.data() + static_cast<std::size_t>(ih) * is.w;
              const long shift = static_cast<long>(kw) - padding;
              if (stride == 1) {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) orow[ow] += wv * irow[ow + shift];
              } else {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                  orow[ow] += wv * irow[static_cast<long>(ow) * stride + shift];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 conv_input_grad(const Tensor4& grad_out, const Tensor4& weights, int stride, int padding,
                        std::size_t groups, std::size_t out_h, std::size_t out_w) {
  const auto& gs = grad_out.shape();
  const auto& ws = weights.shape();
  const std::size_t cin_g = ws.c;
  const std::size_t cout = ws.n;
  const std::size_t cout_g = cout / groups;
  const std::size_t k = ws.h;

  Tensor4 gx({gs.n, cin_g * groups, out_h, out_w});
  for (std::size_t n = 0; n < gs.n; ++n) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      const auto src = grad_out.plane(n, oc);
      const std::size_t g = oc / cout_g;
      for (std::size_t icg = 0; icg < cin_g; ++icg) {
        auto dst = gx.plane(n, g * cin_g + icg);
        for (std::size_t kh = 0; kh < k; ++kh) {
          for (std::size_t kw = 0; kw < k; ++kw) {
            const double wv = weights(oc, icg, kh, kw);
            const ColumnRange cols = valid_columns(gs.w, out_w, stride, padding, kw);
            for (std::size_t oh = 0; oh < gs.h; ++oh) {
              const long ih = static_cast<long>(oh * stride + kh) - padding;
              if (ih < 0 || ih >= static_cast<long>(out_h)) continue;
              const double* grow = src.data() + oh * gs.w;
              double* xrow = dst.data() + static_cast<std::size_t>(ih) * out_w;
              const long shift = static_cast<long>(kw) - padding;
              if (stride == 1) {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) xrow[ow + shift] += wv * grow[ow];
              } else {
                for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                  xrow[static_cast<long>(ow) * stride + shift] += wv * grow[ow];
                }
              }
            }
          }
        }
      }
    }
  }
  return gx;
}

Tensor4 conv_weight_grad(const Tensor4& input, const Tensor4& grad_out, int stride, int padding,
                         std::size_t groups, std::size_t kernel) {
  const auto& is = input.shape();
  const auto& gs = grad_out.shape();
  const std::size_t cout = gs.c;
  const std::size_t cin_g = is.c / groups;
  const std::size_t cout_g = cout / groups;

  Tensor4 gw({cout, cin_g, kernel, kernel});
  for (std::size_t oc = 0; oc < cout; ++oc) {
    const std::size_t g = oc / cout_g;
    for (std::size_t icg = 0; icg < cin_g; ++icg) {
      for (std::size_t kh = 0; kh < kernel; ++kh) {
        for (std::size_t kw = 0; kw < kernel; ++kw) {
          const ColumnRange cols = valid_columns(gs.w, is.w, stride, padding, kw);
          const long shift = static_cast<long>(kw) - padding;
          double acc = 0.0;
          for (std::size_t n = 0; n < is.n; ++n) {
            const auto gsrc = grad_out.plane(n, oc);
            const auto xsrc = input.plane(n, g * cin_g + icg);
            for (std::size_t oh = 0; oh < gs.h; ++oh) {
              const long ih = static_cast<long>(oh * stride + kh) - padding;
              if (ih < 0 || ih >= static_cast<long>(is.h)) continue;
              const double* grow = gsrc.data() + oh * gs.w;
              const double* xrow = xsrc.data() + static_cast<std::size_t>(ih) * is.w;
              for (std::size_t ow = cols.lo; ow < cols.hi; ++ow) {
                acc += grow[ow] * xrow[static_cast<long>(ow) * stride + shift];
              }
            }
          }
          gw(oc, icg, kh, kw) = acc;
        }
      }
    }
  }
  return gw;
}

std::vector<double> channel_sum(const Tensor4& grad_out) {
  const auto& s = grad_out.shape();
  std::vector<double> out(s.c, 0.0);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (double v : grad_out.plane(n, c)) out[c] += v;
    }
  }
  return out;
}

void add_channel_bias(Tensor4& t, std::span<const double> bias) {
  const auto& s = t.shape();
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (double& v : t.plane(n, c)) v += bias[c];
    }
  }
}

}  // namespace kernels

Tensor4 conv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding) {
  check_hyper("conv2d", stride, padding);
  check_layer_input("conv2d", input);
  check_square_kernel("conv2d", kernel.weights);
  if (kernel.weights.shape().c != input.shape().c) {
    throw ShapeError("conv2d", "input channels", kernel.weights.shape().c, input.shape().c);
  }
  check_bias("conv2d", kernel, kernel.weights.shape().n);
  return kernels::conv_forward(input, kernel.weights, bias_span(kernel), stride, padding, 1);
}

Tensor4 depthwise_conv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding) {
  check_hyper("depthwise_conv2d", stride, padding);
  check_layer_input("depthwise_conv2d", input);
  check_square_kernel("depthwise_conv2d", kernel.weights);
  if (kernel.weights.shape().c != 1) {
    throw ShapeError("depthwise_conv2d", "kernel input slots per group", 1, kernel.weights.shape().c);
  }
  if (kernel.weights.shape().n != input.shape().c) {
    throw ShapeError("depthwise_conv2d", "input channels", kernel.weights.shape().n, input.shape().c);
  }
  check_bias("depthwise_conv2d", kernel, input.shape().c);
  return kernels::conv_forward(input, kernel.weights, bias_span(kernel), stride, padding, input.shape().c);
}

Tensor4 pointwise_conv2d(const Tensor4& input, const ConvKernel& kernel) {
  if (kernel.weights.shape().h != 1 || kernel.weights.shape().w != 1) {
    throw ShapeError("pointwise_conv2d", "kernel size", 1, kernel.weights.shape().h);
  }
  return conv2d(input, kernel, 1, 0);
}

Tensor4 tconv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding, int output_padding) {
  check_hyper("tconv2d", stride, padding);
  check_layer_input("tconv2d", input);
  check_square_kernel("tconv2d", kernel.weights);
  if (output_padding < 0 || output_padding >= stride) {
    throw ShapeError("tconv2d: output_padding must satisfy 0 <= output_padding < stride, got " +
                     std::to_string(output_padding) + " with stride " + std::to_string(stride));
  }
  const auto& ws = kernel.weights.shape();
  if (ws.n != input.shape().c) throw ShapeError("tconv2d", "input channels", ws.n, input.shape().c);
  check_bias("tconv2d", kernel, ws.c);
  const std::size_t k = ws.h;
  Tensor4 out = kernels::conv_input_grad(input, kernel.weights, stride, padding, 1,
                                         tconv_output_size(input.shape().h, k, stride, padding, output_padding),
                                         tconv_output_size(input.shape().w, k, stride, padding, output_padding));
  if (kernel.bias) kernels::add_channel_bias(out, *kernel.bias);
  return out;
}

Tensor4 depthwise_tconv2d(const Tensor4& input, const ConvKernel& kernel, int stride, int padding,
                          int output_padding) {
  check_hyper("depthwise_tconv2d", stride, padding);
  check_layer_input("depthwise_tconv2d", input);
  check_square_kernel("depthwise_tconv2d", kernel.weights);
  if (output_padding < 0 || output_padding >= stride) {
    throw ShapeError("depthwise_tconv2d: output_padding must satisfy 0 <= output_padding < stride, got " +
                     std::to_string(output_padding) + " with stride " + std::to_string(stride));
  }
  const auto& ws = kernel.weights.shape();
  if (ws.c != 1) throw ShapeError("depthwise_tconv2d", "kernel input slots per group", 1, ws.c);
  if (ws.n != input.shape().c) throw ShapeError("depthwise_tconv2d", "input channels", ws.n, input.shape().c);
  check_bias("depthwise_tconv2d", kernel, ws.n);
  const std::size_t k = ws.h;
  Tensor4 out = kernels::conv_input_grad(input, kernel.weights, stride, padding, input.shape().c,
                                         tconv_output_size(input.shape().h, k, stride, padding, output_padding),
                                         tconv_output_size(input.shape().w, k, stride, padding, output_padding));
  if (kernel.bias) kernels::add_channel_bias(out, *kernel.bias);
  return out;
}

Tensor4 prelu(const Tensor4& input, std::span<const double> slopes) {
  const auto& s = input.shape();
  if (slopes.size() != s.c) throw ShapeError("prelu", "slopes length", s.c, slopes.size());
  Tensor4 out = input;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (double& v : out.plane(n, c)) {
        if (v < 0.0) v *= slopes[c];
      }
    }
  }
  return out;
}

Tensor4 sigmoid(const Tensor4& input) {
  Tensor4 out = input;
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

}  // namespace dscjscc
