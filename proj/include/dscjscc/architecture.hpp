#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dscjscc {

enum class LayerKind { Conv, DSConv, TConv, DSTConv };
enum class Activation { PReLU, Sigmoid, None };

std::string_view layer_kind_name(LayerKind kind);
std::string_view activation_name(Activation act);
LayerKind parse_layer_kind(std::string_view name);
Activation parse_activation(std::string_view name);

bool is_transposed(LayerKind kind);
bool is_separable(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  int stride = 1;
  int padding = 0;
  int output_padding = 0;  // transposed kinds only
  Activation activation = Activation::None;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Image dimensions in (W, H, C) order.
struct InputShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;

  std::size_t source_symbols() const { return width * height * channels; }
  std::string str() const;  // "WxHxC"
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

InputShape parse_input_shape(std::string_view text);

struct SpatialDims {
  std::size_t h = 0;
  std::size_t w = 0;
  friend bool operator==(const SpatialDims&, const SpatialDims&) = default;
};

// Output spatial size of one layer; throws ShapeError for impossible layers.
SpatialDims layer_output_dims(const LayerSpec& layer, SpatialDims in);

inline constexpr std::size_t kCodecDepth = 5;

struct ArchitectureSpec {
  std::array<LayerSpec, kCodecDepth> encoder{};
  std::array<LayerSpec, kCodecDepth> decoder{};
  InputShape input{};
  std::size_t latent_channels = 0;  // c
  SpatialDims latent{};             // (H̄, W̄)

  // n = W*H*C
  std::size_t source_symbols() const { return input.source_symbols(); }
  // k = c*H̄*W̄/2 complex channel symbols
  std::size_t channel_symbols() const { return latent_channels * latent.h * latent.w / 2; }
  double bandwidth_ratio() const {
    return static_cast<double>(channel_symbols()) / static_cast<double>(source_symbols());
  }

  // Output dims of every encoder layer, then every decoder layer.
  std::vector<SpatialDims> layer_output_dims() const;

  // Checks kind placement, channel chaining, activations, the shape round
  // trip, and that the latent pairs into complex symbols.
  void validate() const;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

// Five 5x5 layers per side: encoder strides (2,2,1,1,1) with filters
// (16,32,32,32,c); decoder mirrored with strides (1,1,1,2,2) and filters
// (32,32,32,16,C). PReLU on hidden layers, no activation on the encoder
// output, sigmoid on the decoder output.
ArchitectureSpec default_base_architecture(InputShape input, std::size_t latent_channels);

enum class VariantId { Baseline, R20, R40, R60E1D1, R60E2D1, R60E2D2, R60E2D3, R60E1D2, R60E3D2, R80, R100 };

// Complexity-table order.
const std::vector<VariantId>& all_variants();
std::string_view variant_name(VariantId id);
// Accepts the kebab-case names plus "dsc-jscc-60" for the E1D1 row.
VariantId parse_variant(std::string_view name);

// Which layers are separable; index 0 is layer 1.
struct ReplacementPattern {
  std::array<bool, kCodecDepth> encoder{};
  std::array<bool, kCodecDepth> decoder{};
};

ReplacementPattern replacement_pattern(VariantId id);

// Rewrites layer kinds only; every other hyperparameter is kept.
ArchitectureSpec build_variant(VariantId id, const ArchitectureSpec& base);

std::string kind_pattern(const std::array<LayerSpec, kCodecDepth>& layers);  // "Conv,DSConv,..."

}  // namespace dscjscc
