#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dscjscc/architecture.hpp"
#include "dscjscc/tape.hpp"
#include "dscjscc/tensor.hpp"

namespace dscjscc {

using ComplexVector = std::vector<std::complex<double>>;

struct Parameter {
  std::string name;
  Tensor4 value;
};

// [0,255] -> [0,1]; rejects values outside [0,255].
Tensor4 normalize_pixels(const Tensor4& image);
// [0,1] -> [0,255]; rejects values outside [0,1].
Tensor4 denormalize_pixels(const Tensor4& image);

// Adjacent row-major scalar pairs become (real, imag); one vector per batch item.
std::vector<ComplexVector> reshape_to_complex(const Tensor4& feature);
// Inverse of reshape_to_complex.
Tensor4 complex_to_feature(const std::vector<ComplexVector>& symbols, Shape4 shape);

// Rescales z so that ||z||^2 = k * power. Throws NumericError on a zero vector.
ComplexVector power_normalize(const ComplexVector& z, std::size_t k, double power);

// Differentiable power normalization of a real latent tensor, applied per batch
// item over its own c*H*W/2 complex symbols.
VarId power_normalize(Tape& tape, VarId latent, double power);

// Encoder/decoder weights for one architecture.
//
// Parameters are named "<side><layer>.<part>", e.g. "enc1.weight",
// "enc2.dw.bias", "dec4.pw.weight", "enc3.prelu". Biases and PReLU slopes are
// (C,1,1,1) tensors. A built model is immutable except through parameters().
class CodecModel {
 public:
  // Glorot-uniform kernels, zero biases, PReLU slopes 0.25, from `seed`.
  CodecModel(ArchitectureSpec arch, std::uint64_t seed, double transmit_power = 1.0,
             std::optional<VariantId> variant = std::nullopt);

  // Adopts existing tensors (checkpoint loading); names and shapes must match
  // what the architecture would allocate.
  static CodecModel from_parameters(ArchitectureSpec arch, std::vector<Parameter> params, double transmit_power,
                                    std::optional<VariantId> variant);

  const ArchitectureSpec& architecture() const { return arch_; }
  std::optional<VariantId> variant() const { return variant_; }
  double transmit_power() const { return power_; }
  std::size_t channel_symbols() const { return arch_.channel_symbols(); }

  const std::vector<Parameter>& parameters() const { return params_; }
  std::vector<Parameter>& parameters() { return params_; }

  // Records every parameter as a tape variable, in parameters() order.
  std::vector<VarId> bind(Tape& tape) const;
  // Normalized image (N,C,H,W) -> power-normalized latent (N,c,H̄,W̄).
  VarId encoder_graph(Tape& tape, const std::vector<VarId>& params, VarId normalized_image) const;
  // Latent (N,c,H̄,W̄) -> reconstruction in [0,1].
  VarId decoder_graph(Tape& tape, const std::vector<VarId>& params, VarId latent) const;

  // Pixel image in [0,255] -> one vector of k complex symbols per batch item.
  std::vector<ComplexVector> encode(const Tensor4& image) const;
  // Received symbols -> reconstructed image in [0,255].
  Tensor4 decode(const std::vector<ComplexVector>& symbols) const;

  Shape4 latent_shape(std::size_t batch) const;
  Shape4 image_shape(std::size_t batch) const;

 private:
  struct LayerSlots {
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::optional<std::size_t> pw_weight;
    std::optional<std::size_t> pw_bias;
    std::optional<std::size_t> slopes;
  };

  CodecModel() = default;
  void allocate(std::uint64_t seed);
  VarId layer_graph(Tape& tape, const std::vector<VarId>& params, const LayerSpec& layer, const LayerSlots& slots,
                    VarId x) const;

  ArchitectureSpec arch_;
  std::optional<VariantId> variant_;
  double power_ = 1.0;
  std::vector<Parameter> params_;
  std::vector<LayerSlots> slots_;  // encoder layers then decoder layers
};

}  // namespace dscjscc
