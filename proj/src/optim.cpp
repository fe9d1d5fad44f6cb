#include "dscjscc/optim.hpp"

#include <cmath>

namespace dscjscc {

void adam_step(std::vector<Tensor4*> params, const std::vector<const Tensor4*>& grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) throw ShapeError("adam_step", "gradient count", params.size(), grads.size());
  if (state.first_moment.empty()) {
    for (const Tensor4* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step", "moment count", params.size(), state.first_moment.size());
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor4& p = *params[i];
    const Tensor4& g = *grads[i];
    require_same_shape("adam_step", p.shape(), g.shape());
    require_same_shape("adam_step moments", p.shape(), state.first_moment[i].shape());
    Tensor4& m = state.first_moment[i];
    Tensor4& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void adam_step(std::vector<Tensor4>& params, const std::vector<Tensor4>& grads, AdamState& state, double lr) {
  std::vector<Tensor4*> p;
  std::vector<const Tensor4*> g;
  for (auto& t : params) p.push_back(&t);
  for (const auto& t : grads) g.push_back(&t);
  adam_step(std::move(p), g, state, lr);
}

}  // namespace dscjscc
