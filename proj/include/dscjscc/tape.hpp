#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dscjscc/tensor.hpp"

namespace dscjscc {

class Tape;

// Handle to a value recorded on a Tape.
struct VarId {
  std::size_t index = SIZE_MAX;
  std::uint64_t tape = 0;

  bool valid() const { return index != SIZE_MAX; }
  friend bool operator==(const VarId&, const VarId&) = default;
};

// Gradients produced by Tape::backward, keyed by VarId.
class GradRecord {
 public:
  GradRecord() = default;
  GradRecord(std::uint64_t tape, std::vector<std::optional<Tensor4>> grads)
      : tape_(tape), grads_(std::move(grads)) {}

  bool has(VarId v) const;
  // Throws if no gradient reached v.
  const Tensor4& at(VarId v) const;
  Tensor4 take(VarId v);

 private:
  std::uint64_t tape_ = 0;
  std::vector<std::optional<Tensor4>> grads_;
};

// Reverse-mode recorder for the codec primitives.
//
// Nodes are appended in evaluation order, so the node list is already a
// topological order and backward() is a single reverse sweep. Parameters enter
// as variables, images and noise as constants; no gradient is computed for a
// node unless some path leads from a variable to it.
class Tape {
 public:
  // Receives the upstream gradient and which parents need a gradient; returns
  // one entry per parent (nullopt where not needed).
  using BackwardFn =
      std::function<std::vector<std::optional<Tensor4>>(const Tensor4& upstream, const std::vector<bool>& needed)>;

  Tape();
  // Backward closures refer to the tape's own node storage.
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  VarId constant(Tensor4 value);
  VarId variable(Tensor4 value);

  const Tensor4& value(VarId v) const;
  bool requires_grad(VarId v) const;
  std::size_t size() const { return nodes_.size(); }

  // Introspection over recorded nodes, in recording order.
  VarId at(std::size_t index) const;
  std::string_view name(VarId v) const;
  std::vector<VarId> parents(VarId v) const;

  // Registration hook for ops defined outside this module (power normalization,
  // channel models).
  VarId record(Tensor4 value, std::vector<VarId> parents, BackwardFn backward, std::string name);

  VarId conv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding);
  VarId depthwise_conv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding);
  VarId pointwise_conv2d(VarId input, VarId weights, std::optional<VarId> bias);
  VarId tconv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding,
                int output_padding);
  VarId depthwise_tconv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding,
                          int output_padding);
  // Slopes and biases are stored as (C, 1, 1, 1) tensors.
  VarId prelu(VarId input, VarId slopes);
  VarId sigmoid(VarId input);
  VarId scale(VarId input, double factor);
  // Mean of squared differences over all elements; scalar (1,1,1,1) result.
  VarId mse(VarId a, VarId b);

  // Reverse sweep from `output`. Gradients are returned for every node that
  // requires one.
  GradRecord backward(VarId output, const Tensor4& upstream) const;
  // Convenience for scalar outputs: upstream gradient 1.
  GradRecord backward(VarId output) const;

 private:
  struct Node {
    Tensor4 value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
    std::string name;
  };

  const Node& node(VarId v, const char* op) const;
  VarId conv_like(const char* name, VarId input, VarId weights, std::optional<VarId> bias, int stride,
                  int padding, int output_padding, bool transposed, bool depthwise);

  std::uint64_t id_;
  std::vector<Node> nodes_;
};

// Bias / slope vector stored as a (C,1,1,1) tensor.
Tensor4 channel_vector(const std::vector<double>& values);

}  // namespace dscjscc
