#include "dscjscc/architecture.hpp"

#include <charconv>

#include "dscjscc/error.hpp"
#include "dscjscc/ops.hpp"

namespace dscjscc {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "Conv";
    case LayerKind::DSConv: return "DSConv";
    case LayerKind::TConv: return "TConv";
    case LayerKind::DSTConv: return "DSTConv";
  }
  return "?";
}

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::PReLU: return "PReLU";
    case Activation::Sigmoid: return "Sigmoid";
    case Activation::None: return "None";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::Conv, LayerKind::DSConv, LayerKind::TConv, LayerKind::DSTConv}) {
    if (layer_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::PReLU, Activation::Sigmoid, Activation::None}) {
    if (activation_name(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

bool is_transposed(LayerKind kind) { return kind == LayerKind::TConv || kind == LayerKind::DSTConv; }
bool is_separable(LayerKind kind) { return kind == LayerKind::DSConv || kind == LayerKind::DSTConv; }

std::string InputShape::str() const {
  return std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(channels);
}

InputShape parse_input_shape(std::string_view text) {
  std::array<std::size_t, 3> dims{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find('x', pos) : text.size();
    if (end == std::string_view::npos) break;
    const auto part = text.substr(pos, end - pos);
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), dims[i]);
    if (ec != std::errc() || ptr != part.data() + part.size() || dims[i] == 0) {
      throw ConfigError("invalid input shape '" + std::string(text) + "' (expected WxHxC)");
    }
    pos = end + 1;
    if (i == 2) return {dims[0], dims[1], dims[2]};
  }
  throw ConfigError("invalid input shape '" + std::string(text) + "' (expected WxHxC)");
}

SpatialDims layer_output_dims(const LayerSpec& layer, SpatialDims in) {
  if (is_transposed(layer.kind)) {
    return {tconv_output_size(in.h, layer.kernel, layer.stride, layer.padding, layer.output_padding),
            tconv_output_size(in.w, layer.kernel, layer.stride, layer.padding, layer.output_padding)};
  }
  return {conv_output_size(in.h, layer.kernel, layer.stride, layer.padding),
          conv_output_size(in.w, layer.kernel, layer.stride, layer.padding)};
}

std::vector<SpatialDims> ArchitectureSpec::layer_output_dims() const {
  std::vector<SpatialDims> dims;
  SpatialDims cur{input.height, input.width};
  for (const auto& l : encoder) {
    cur = dscjscc::layer_output_dims(l, cur);
    dims.push_back(cur);
  }
  for (const auto& l : decoder) {
    cur = dscjscc::layer_output_dims(l, cur);
    dims.push_back(cur);
  }
  return dims;
}

void ArchitectureSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ShapeError("architecture: " + msg); };
  if (input.source_symbols() == 0) fail("input shape " + input.str() + " is empty");

  std::size_t channels = input.channels;
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    const auto& l = encoder[i];
    const std::string where = "encoder layer " + std::to_string(i + 1);
    if (is_transposed(l.kind)) fail(where + " must be Conv or DSConv");
    if (l.output_padding != 0) fail(where + " has output_padding on a non-transposed layer");
    if (l.in_channels != channels) throw ShapeError(where, "in_channels", channels, l.in_channels);
    if (l.out_channels == 0 || l.kernel == 0 || l.stride < 1 || l.padding < 0) fail(where + " has invalid hyperparameters");
    const bool last = i + 1 == kCodecDepth;
    if (last != (l.activation == Activation::None)) fail(where + ": activation None is reserved for the final encoder layer");
    channels = l.out_channels;
  }
  if (channels != latent_channels) throw ShapeError("architecture", "latent channels", latent_channels, channels);
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    const auto& l = decoder[i];
    const std::string where = "decoder layer " + std::to_string(i + 1);
    if (!is_transposed(l.kind)) fail(where + " must be TConv or DSTConv");
    if (l.output_padding < 0 || l.output_padding >= l.stride) fail(where + " needs 0 <= output_padding < stride");
    if (l.in_channels != channels) throw ShapeError(where, "in_channels", channels, l.in_channels);
    if (l.out_channels == 0 || l.kernel == 0 || l.stride < 1 || l.padding < 0) fail(where + " has invalid hyperparameters");
    if (l.activation == Activation::None) fail(where + ": activation None is reserved for the final encoder layer");
    channels = l.out_channels;
  }
  if (channels != input.channels) throw ShapeError("architecture", "reconstructed channels", input.channels, channels);

  const auto dims = layer_output_dims();
  if (dims[kCodecDepth - 1] != latent) {
    fail("encoder produces " + std::to_string(dims[kCodecDepth - 1].h) + "x" + std::to_string(dims[kCodecDepth - 1].w) +
         " latent, spec says " + std::to_string(latent.h) + "x" + std::to_string(latent.w));
  }
  const SpatialDims out = dims.back();
  if (out.h != input.height || out.w != input.width) {
    fail("decoder output " + std::to_string(out.w) + "x" + std::to_string(out.h) + " does not round-trip input " +
         std::to_string(input.width) + "x" + std::to_string(input.height));
  }
  if ((latent_channels * latent.h * latent.w) % 2 != 0) fail("latent element count is odd; cannot pair into complex symbols");
}

ArchitectureSpec default_base_architecture(InputShape input, std::size_t latent_channels) {
  if (latent_channels == 0) throw ConfigError("latent channel count c must be positive");
  constexpr std::size_t kKernel = 5;
  constexpr int kPad = 2;
  const std::array<std::size_t, kCodecDepth> enc_filters{16, 32, 32, 32, latent_channels};
  const std::array<int, kCodecDepth> enc_strides{2, 2, 1, 1, 1};
  const std::array<std::size_t, kCodecDepth> dec_filters{32, 32, 32, 16, input.channels};
  const std::array<int, kCodecDepth> dec_strides{1, 1, 1, 2, 2};

  ArchitectureSpec arch;
  arch.input = input;
  arch.latent_channels = latent_channels;
  std::size_t ch = input.channels;
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    arch.encoder[i] = LayerSpec{LayerKind::Conv, ch, enc_filters[i], kKernel, enc_strides[i], kPad, 0,
                                i + 1 < kCodecDepth ? Activation::PReLU : Activation::None};
    ch = enc_filters[i];
  }
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    arch.decoder[i] = LayerSpec{LayerKind::TConv, ch, dec_filters[i], kKernel, dec_strides[i], kPad,
                                dec_strides[i] > 1 ? 1 : 0,
                                i + 1 < kCodecDepth ? Activation::PReLU : Activation::Sigmoid};
    ch = dec_filters[i];
  }
  SpatialDims cur{input.height, input.width};
  for (const auto& l : arch.encoder) cur = layer_output_dims(l, cur);
  arch.latent = cur;
  arch.validate();
  return arch;
}

const std::vector<VariantId>& all_variants() {
  static const std::vector<VariantId> all{VariantId::Baseline, VariantId::R20,     VariantId::R40,
                                          VariantId::R60E1D1,  VariantId::R60E2D1, VariantId::R60E2D2,
                                          VariantId::R60E2D3,  VariantId::R60E1D2, VariantId::R60E3D2,
                                          VariantId::R80,      VariantId::R100};
  return all;
}

std::string_view variant_name(VariantId id) {
  switch (id) {
    case VariantId::Baseline: return "baseline";
    case VariantId::R20: return "dsc-jscc-20";
    case VariantId::R40: return "dsc-jscc-40";
    case VariantId::R60E1D1: return "dsc-jscc-60-e1d1";
    case VariantId::R60E2D1: return "dsc-jscc-60-e2d1";
    case VariantId::R60E2D2: return "dsc-jscc-60-e2d2";
    case VariantId::R60E2D3: return "dsc-jscc-60-e2d3";
    case VariantId::R60E1D2: return "dsc-jscc-60-e1d2";
    case VariantId::R60E3D2: return "dsc-jscc-60-e3d2";
    case VariantId::R80: return "dsc-jscc-80";
    case VariantId::R100: return "dsc-jscc-100";
  }
  return "?";
}

VariantId parse_variant(std::string_view name) {
  if (name == "dsc-jscc-60") return VariantId::R60E1D1;
  for (VariantId id : all_variants()) {
    if (variant_name(id) == name) return id;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

ReplacementPattern replacement_pattern(VariantId id) {
  // Layers 1-5 per side; "early", "middle", "late" blocks are 1-3, 2-4, 3-5.
  constexpr std::array<bool, 5> none{false, false, false, false, false};
  constexpr std::array<bool, 5> first1{true, false, false, false, false};
  constexpr std::array<bool, 5> first2{true, true, false, false, false};
  constexpr std::array<bool, 5> early{true, true, true, false, false};
  constexpr std::array<bool, 5> middle{false, true, true, true, false};
  constexpr std::array<bool, 5> late{false, false, true, true, true};
  constexpr std::array<bool, 5> first4{true, true, true, true, false};
  constexpr std::array<bool, 5> all{true, true, true, true, true};
  switch (id) {
    case VariantId::Baseline: return {none, none};
    case VariantId::R20: return {first1, first1};
    case VariantId::R40: return {first2, first2};
    case VariantId::R60E1D1: return {early, early};
    case VariantId::R60E2D1: return {middle, early};
    case VariantId::R60E2D2: return {middle, middle};
    case VariantId::R60E2D3: return {middle, late};
    case VariantId::R60E1D2: return {early, middle};
    case VariantId::R60E3D2: return {late, middle};
    case VariantId::R80: return {first4, first4};
    case VariantId::R100: return {all, all};
  }
  throw ConfigError("unknown variant id");
}

ArchitectureSpec build_variant(VariantId id, const ArchitectureSpec& base) {
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    if (base.encoder[i].kind != LayerKind::Conv || base.decoder[i].kind != LayerKind::TConv) {
      throw ConfigError("build_variant: base architecture must use standard Conv/TConv layers throughout");
    }
  }
  const ReplacementPattern p = replacement_pattern(id);
  ArchitectureSpec out = base;
  for (std::size_t i = 0; i < kCodecDepth; ++i) {
    if (p.encoder[i]) out.encoder[i].kind = LayerKind::DSConv;
    if (p.decoder[i]) out.decoder[i].kind = LayerKind::DSTConv;
  }
  return out;
}

std::string kind_pattern(const std::array<LayerSpec, kCodecDepth>& layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) s += ',';
    s += layer_kind_name(layers[i].kind);
  }
  return s;
}

}  // namespace dscjscc
