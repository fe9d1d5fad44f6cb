#include "dscjscc/model.hpp"

#include <cmath>

#include "dscjscc/rng.hpp"

namespace dscjscc {

Tensor4 normalize_pixels(const Tensor4& image) {
  Tensor4 out = image;
  for (double& v : out.data()) {
    if (!(v >= 0.0 && v <= 255.0)) throw NumericError("normalize_pixels: value " + std::to_string(v) + " outside [0,255]");
    v /= 255.0;
  }
  return out;
}

Tensor4 denormalize_pixels(const Tensor4& image) {
  Tensor4 out = image;
  for (double& v : out.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw NumericError("denormalize_pixels: value " + std::to_string(v) + " outside [0,1]");
    v *= 255.0;
  }
  return out;
}

std::vector<ComplexVector> reshape_to_complex(const Tensor4& feature) {
  const auto& s = feature.shape();
  const std::size_t per_item = s.c * s.h * s.w;
  if (per_item % 2 != 0) {
    throw ShapeError("reshape_to_complex: " + std::to_string(per_item) + " scalars per item cannot pair into complex symbols");
  }
  std::vector<ComplexVector> out(s.n, ComplexVector(per_item / 2));
  for (std::size_t n = 0; n < s.n; ++n) {
    const auto item = feature.item(n);
    for (std::size_t i = 0; i < per_item / 2; ++i) out[n][i] = {item[2 * i], item[2 * i + 1]};
  }
  return out;
}

Tensor4 complex_to_feature(const std::vector<ComplexVector>& symbols, Shape4 shape) {
  if (symbols.size() != shape.n) throw ShapeError("complex_to_feature", "batch", shape.n, symbols.size());
  const std::size_t per_item = shape.c * shape.h * shape.w;
  if (per_item % 2 != 0) throw ShapeError("complex_to_feature: odd element count per item");
  Tensor4 out(shape);
  for (std::size_t n = 0; n < shape.n; ++n) {
    if (symbols[n].size() != per_item / 2) throw ShapeError("complex_to_feature", "symbol count", per_item / 2, symbols[n].size());
    auto item = out.item(n);
    for (std::size_t i = 0; i < per_item / 2; ++i) {
      item[2 * i] = symbols[n][i].real();
      item[2 * i + 1] = symbols[n][i].imag();
    }
  }
  return out;
}

ComplexVector power_normalize(const ComplexVector& z, std::size_t k, double power) {
  if (z.size() != k) throw ShapeError("power_normalize", "symbols", k, z.size());
  double energy = 0.0;
  for (const auto& s : z) energy += std::norm(s);
  if (energy == 0.0) throw NumericError("power_normalize: input has zero norm");
  const double scale = std::sqrt(static_cast<double>(k) * power) / std::sqrt(energy);
  ComplexVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * scale;
  return out;
}

VarId power_normalize(Tape& tape, VarId latent, double power) {
  const Tensor4& x = tape.value(latent);
  const std::size_t batch = x.shape().n;
  const std::size_t per_item = x.shape().c * x.shape().h * x.shape().w;
  if (per_item % 2 != 0) throw ShapeError("power_normalize: odd element count per item");
  const double target = std::sqrt(static_cast<double>(per_item / 2) * power);

  Tensor4 out = x;
  std::vector<double> norms(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    auto item = out.item(n);
    double energy = 0.0;
    for (double v : item) energy += v * v;
    if (energy == 0.0) throw NumericError("power_normalize: batch item " + std::to_string(n) + " has zero norm");
    norms[n] = std::sqrt(energy);
    const double s = target / norms[n];
    for (double& v : item) v *= s;
  }

  // y = t x / r  =>  dL/dx = (t / r) (g - x (x.g) / r^2)
  auto fn = [x, norms, target](const Tensor4& g, const std::vector<bool>&) {
    Tensor4 gx(x.shape());
    for (std::size_t n = 0; n < norms.size(); ++n) {
      const auto xi = x.item(n);
      const auto gi = g.item(n);
      auto di = gx.item(n);
      double xg = 0.0;
      for (std::size_t i = 0; i < xi.size(); ++i) xg += xi[i] * gi[i];
      const double r = norms[n];
      const double a = target / r;
      const double b = a * xg / (r * r);
      for (std::size_t i = 0; i < xi.size(); ++i) di[i] = a * gi[i] - b * xi[i];
    }
    return std::vector<std::optional<Tensor4>>{std::move(gx)};
  };
  return tape.record(std::move(out), {latent}, std::move(fn), "power_normalize");
}

CodecModel::CodecModel(ArchitectureSpec arch, std::uint64_t seed, double transmit_power,
                       std::optional<VariantId> variant)
    : arch_(std::move(arch)), variant_(variant), power_(transmit_power) {
  arch_.validate();
  if (!(power_ > 0.0)) throw ConfigError("transmit power must be positive");
  allocate(seed);
}

CodecModel CodecModel::from_parameters(ArchitectureSpec arch, std::vector<Parameter> params, double transmit_power,
                                       std::optional<VariantId> variant) {
  CodecModel m(std::move(arch), 0, transmit_power, variant);
  if (params.size() != m.params_.size()) {
    throw ShapeError("CodecModel::from_parameters", "parameter count", m.params_.size(), params.size());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != m.params_[i].name) {
      throw ShapeError("CodecModel::from_parameters: expected parameter '" + m.params_[i].name + "', found '" +
                       params[i].name + "'");
    }
    require_same_shape("CodecModel::from_parameters " + params[i].name, m.params_[i].value.shape(),
                       params[i].value.shape());
    m.params_[i].value = std::move(params[i].value);
  }
  return m;
}

void CodecModel::allocate(std::uint64_t seed) {
  Rng rng(seed);
  params_.clear();
  slots_.clear();

  auto add = [this](std::string name, Tensor4 value) {
    params_.push_back({std::move(name), std::move(value)});
    return params_.size() - 1;
  };
  auto glorot = [&rng](Shape4 shape, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return Tensor4::uniform(shape, rng, -limit, limit);
  };

  auto add_layer = [&](const std::string& prefix, const LayerSpec& l) {
    LayerSlots s;
    const std::size_t k = l.kernel;
    const std::size_t area = k * k;
    if (is_separable(l.kind)) {
      s.weight = add(prefix + ".dw.weight", glorot({l.in_channels, 1, k, k}, area, area));
      s.bias = add(prefix + ".dw.bias", Tensor4({l.in_channels, 1, 1, 1}));
      s.pw_weight = add(prefix + ".pw.weight", glorot({l.out_channels, l.in_channels, 1, 1}, l.in_channels, l.out_channels));
      s.pw_bias = add(prefix + ".pw.bias", Tensor4({l.out_channels, 1, 1, 1}));
    } else if (is_transposed(l.kind)) {
      s.weight = add(prefix + ".weight",
                     glorot({l.in_channels, l.out_channels, k, k}, area * l.in_channels, area * l.out_channels));
      s.bias = add(prefix + ".bias", Tensor4({l.out_channels, 1, 1, 1}));
    } else {
      s.weight = add(prefix + ".weight",
                     glorot({l.out_channels, l.in_channels, k, k}, area * l.in_channels, area * l.out_channels));
      s.bias = add(prefix + ".bias", Tensor4({l.out_channels, 1, 1, 1}));
    }
    if (l.activation == Activation::PReLU) s.slopes = add(prefix + ".prelu", Tensor4({l.out_channels, 1, 1, 1}, 0.25));
    slots_.push_back(s);
  };

  for (std::size_t i = 0; i < kCodecDepth; ++i) add_layer("enc" + std::to_string(i + 1), arch_.encoder[i]);
  for (std::size_t i = 0; i < kCodecDepth; ++i) add_layer("dec" + std::to_string(i + 1), arch_.decoder[i]);
}

std::vector<VarId> CodecModel::bind(Tape& tape) const {
  std::vector<VarId> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.variable(p.value));
  return vars;
}

VarId CodecModel::layer_graph(Tape& tape, const std::vector<VarId>& p, const LayerSpec& l, const LayerSlots& s,
                              VarId x) const {
  VarId y;
  switch (l.kind) {
    case LayerKind::Conv:
      y = tape.conv2d(x, p[s.weight], p[s.bias], l.stride, l.padding);
      break;
    case LayerKind::TConv:
      y = tape.tconv2d(x, p[s.weight], p[s.bias], l.stride, l.padding, l.output_padding);
      break;
    case LayerKind::DSConv:
      y = tape.depthwise_conv2d(x, p[s.weight], p[s.bias], l.stride, l.padding);
      y = tape.pointwise_conv2d(y, p[*s.pw_weight], p[*s.pw_bias]);
      break;
    case LayerKind::DSTConv:
      y = tape.depthwise_tconv2d(x, p[s.weight], p[s.bias], l.stride, l.padding, l.output_padding);
      y = tape.pointwise_conv2d(y, p[*s.pw_weight], p[*s.pw_bias]);
      break;
  }
  switch (l.activation) {
    case Activation::PReLU: return tape.prelu(y, p[*s.slopes]);
    case Activation::Sigmoid: return tape.sigmoid(y);
    case Activation::None: return y;
  }
  return y;
}

VarId CodecModel::encoder_graph(Tape& tape, const std::vector<VarId>& params, VarId normalized_image) const {
  const auto& s = tape.value(normalized_image).shape();
  require_same_shape("encode", image_shape(s.n), s);
  VarId x = normalized_image;
  for (std::size_t i = 0; i < kCodecDepth; ++i) x = layer_graph(tape, params, arch_.encoder[i], slots_[i], x);
  return power_normalize(tape, x, power_);
}

VarId CodecModel::decoder_graph(Tape& tape, const std::vector<VarId>& params, VarId latent) const {
  const auto& s = tape.value(latent).shape();
  require_same_shape("decode", latent_shape(s.n), s);
  VarId x = latent;
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    x = layer_graph(tape, params, arch_.decoder[i], slots_[kCodecDepth + i], x);
  }
  return x;
}

Shape4 CodecModel::latent_shape(std::size_t batch) const {
  return {batch, arch_.latent_channels, arch_.latent.h, arch_.latent.w};
}

Shape4 CodecModel::image_shape(std::size_t batch) const {
  return {batch, arch_.input.channels, arch_.input.height, arch_.input.width};
}

std::vector<ComplexVector> CodecModel::encode(const Tensor4& image) const {
  if (image.shape().n == 0) throw ShapeError("encode: empty batch");
  require_same_shape("encode", image_shape(image.shape().n), image.shape());
  Tape tape;
  const auto params = bind(tape);
  const VarId x = tape.constant(normalize_pixels(image));
  return reshape_to_complex(tape.value(encoder_graph(tape, params, x)));
}

Tensor4 CodecModel::decode(const std::vector<ComplexVector>& symbols) const {
  if (symbols.empty()) throw ShapeError("decode: empty batch");
  for (const auto& z : symbols) {
    if (z.size() != channel_symbols()) throw ShapeError("decode", "symbol count", channel_symbols(), z.size());
  }
  Tape tape;
  const auto params = bind(tape);
  const VarId latent = tape.constant(complex_to_feature(symbols, latent_shape(symbols.size())));
  return denormalize_pixels(tape.value(decoder_graph(tape, params, latent)));
}

}  // namespace dscjscc
