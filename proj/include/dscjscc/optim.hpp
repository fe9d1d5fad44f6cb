#pragma once

#include <cstdint>
#include <vector>

#include "dscjscc/tensor.hpp"

namespace dscjscc {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor4> first_moment;
  std::vector<Tensor4> second_moment;
};

// Bias-corrected Adam update, in place. Moments are allocated on first use.
void adam_step(std::vector<Tensor4*> params, const std::vector<const Tensor4*>& grads, AdamState& state, double lr);
void adam_step(std::vector<Tensor4>& params, const std::vector<Tensor4>& grads, AdamState& state, double lr);

}  // namespace dscjscc
