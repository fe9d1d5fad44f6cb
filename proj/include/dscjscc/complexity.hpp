#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dscjscc/architecture.hpp"

namespace dscjscc {

class CodecModel;

// Conv/TConv: K^2*Cin*Cout + Cout. DSConv/DSTConv: (K^2*Cin + Cin) + (Cin*Cout + Cout).
// Plus Cout PReLU slopes when the layer uses PReLU.
std::uint64_t layer_params(const LayerSpec& layer);

// Multiply-accumulates at the layer's output resolution; biases and activations
// are not counted. Conv/TConv: K^2*Cin*Cout*Ho*Wo. DSConv/DSTConv:
// K^2*Cin*Ho*Wo + Cin*Cout*Ho*Wo.
std::uint64_t layer_flops(const LayerSpec& layer, SpatialDims out);

// Rounds `value` half-up one decimal digit at a time, `digits` times
// (136649 -> 13665 -> 1367 for digits = 2).
std::uint64_t round_half_up_digitwise(std::uint64_t value, unsigned digits);
// Single half-up rounding to a multiple of 10^digits, returned in those units.
std::uint64_t round_half_up(std::uint64_t value, unsigned digits);
// 1437 -> "143.7"
std::string format_tenths(std::uint64_t tenths);

struct ComplexityRow {
  bool encoder = true;
  std::size_t layer = 0;  // 1-based
  LayerKind kind = LayerKind::Conv;
  SpatialDims out{};
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

// Display values are given to 0.1 units:
// parameters in K are the digit-wise half-up rounding of the exact total;
// FLOPs in M are the sum of per-layer counts each rounded half-up to 0.1 M.
struct ComplexityReport {
  std::string model;
  std::vector<ComplexityRow> rows;
  std::uint64_t total_params = 0;
  std::uint64_t total_flops = 0;
  std::uint64_t params_tenths_k = 0;
  std::uint64_t flops_tenths_m = 0;

  std::string params_display() const { return format_tenths(params_tenths_k); }
  std::string flops_display() const { return format_tenths(flops_tenths_m); }
};

ComplexityReport analyze_architecture(const ArchitectureSpec& arch, std::string name);

inline constexpr InputShape kReferenceInput{256, 256, 3};
inline constexpr std::size_t kReferenceLatentChannels = 8;

ComplexityReport model_complexity(VariantId id, InputShape input = kReferenceInput,
                                  std::size_t latent_channels = kReferenceLatentChannels);

struct Reduction {
  double params_percent = 0.0;
  double flops_percent = 0.0;
};

// 100 * (x_a - x_b) / x_a on exact totals.
Reduction reduction_report(const ComplexityReport& a, const ComplexityReport& b);
Reduction reduction_report(VariantId a, VariantId b, InputShape input = kReferenceInput,
                           std::size_t latent_channels = kReferenceLatentChannels);

// Counts every scalar of every instantiated tensor.
std::uint64_t oracle_param_count(const CodecModel& model);

// Aligned text: one row per report.
std::string complexity_summary_text(const std::vector<ComplexityReport>& reports);
// Aligned text: per-layer rows and the total line for one report.
std::string complexity_layer_text(const ComplexityReport& report);
// Header: variant,params,flops,params_display,flops_display
std::string complexity_csv(const std::vector<ComplexityReport>& reports);

}  // namespace dscjscc
