#include "dscjscc/tape.hpp"

#include <atomic>
#include <cmath>

#include "dscjscc/ops.hpp"

namespace dscjscc {

namespace {

std::atomic<std::uint64_t> next_tape_id{1};

std::vector<double> as_vector(const Tensor4& t) { return t.values(); }

}  // namespace

Tensor4 channel_vector(const std::vector<double>& values) {
  return Tensor4({values.size(), 1, 1, 1}, values);
}

bool GradRecord::has(VarId v) const {
  return v.tape == tape_ && v.index < grads_.size() && grads_[v.index].has_value();
}

const Tensor4& GradRecord::at(VarId v) const {
  if (!has(v)) throw Error("GradRecord: no gradient recorded for variable " + std::to_string(v.index));
  return *grads_[v.index];
}

Tensor4 GradRecord::take(VarId v) {
  if (!has(v)) throw Error("GradRecord: no gradient recorded for variable " + std::to_string(v.index));
  Tensor4 out = std::move(*grads_[v.index]);
  grads_[v.index].reset();
  return out;
}

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

const Tape::Node& Tape::node(VarId v, const char* op) const {
  if (v.tape != id_ || v.index >= nodes_.size()) {
    throw Error(std::string(op) + ": variable was not recorded on this tape");
  }
  return nodes_[v.index];
}

VarId Tape::constant(Tensor4 value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, "constant"});
  return {nodes_.size() - 1, id_};
}

VarId Tape::variable(Tensor4 value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true, "variable"});
  return {nodes_.size() - 1, id_};
}

const Tensor4& Tape::value(VarId v) const { return node(v, "Tape::value").value; }

VarId Tape::at(std::size_t index) const {
  if (index >= nodes_.size()) throw Error("Tape::at: index " + std::to_string(index) + " out of range");
  return VarId{index, id_};
}

std::string_view Tape::name(VarId v) const { return node(v, "Tape::name").name; }

std::vector<VarId> Tape::parents(VarId v) const {
  std::vector<VarId> out;
  for (std::size_t p : node(v, "Tape::parents").parents) out.push_back(VarId{p, id_});
  return out;
}

bool Tape::requires_grad(VarId v) const { return node(v, "Tape::requires_grad").requires_grad; }

VarId Tape::record(Tensor4 value, std::vector<VarId> parents, BackwardFn backward, std::string name) {
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  for (VarId p : parents) {
    const Node& pn = node(p, "Tape::record");
    n.requires_grad = n.requires_grad || pn.requires_grad;
    n.parents.push_back(p.index);
  }
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1, id_};
}

VarId Tape::conv_like(const char* name, VarId input, VarId weights, std::optional<VarId> bias, int stride,
                      int padding, int output_padding, bool transposed, bool depthwise) {
  const Tensor4& x = value(input);
  const Tensor4& w = value(weights);
  ConvKernel kernel{w, std::nullopt};
  if (bias) kernel.bias = as_vector(value(*bias));

  Tensor4 out;
  if (transposed) {
    out = depthwise ? dscjscc::depthwise_tconv2d(x, kernel, stride, padding, output_padding)
                    : dscjscc::tconv2d(x, kernel, stride, padding, output_padding);
  } else {
    out = depthwise ? dscjscc::depthwise_conv2d(x, kernel, stride, padding) : dscjscc::conv2d(x, kernel, stride, padding);
  }

  std::vector<VarId> parents{input, weights};
  if (bias) parents.push_back(*bias);
  const std::size_t groups = depthwise ? x.shape().c : 1;
  const std::size_t k = w.shape().h;
  const Shape4 in_shape = x.shape();
  // Captured by index; the tape outlives its backward closures.
  const std::size_t xi = input.index;
  const std::size_t wi = weights.index;
  const bool has_bias = bias.has_value();

  auto fn = [this, xi, wi, has_bias, transposed, stride, padding, groups, k, in_shape](
                const Tensor4& g, const std::vector<bool>& needed) {
    const Tensor4& xv = nodes_[xi].value;
    const Tensor4& wv = nodes_[wi].value;
    std::vector<std::optional<Tensor4>> grads(has_bias ? 3 : 2);
    if (needed[0]) {
      grads[0] = transposed ? kernels::conv_forward(g, wv, {}, stride, padding, groups)
                            : kernels::conv_input_grad(g, wv, stride, padding, groups, in_shape.h, in_shape.w);
    }
    if (needed[1]) {
      grads[1] = transposed ? kernels::conv_weight_grad(g, xv, stride, padding, groups, k)
                            : kernels::conv_weight_grad(xv, g, stride, padding, groups, k);
    }
    if (has_bias && needed[2]) grads[2] = channel_vector(kernels::channel_sum(g));
    return grads;
  };
  return record(std::move(out), std::move(parents), std::move(fn), name);
}

VarId Tape::conv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding) {
  return conv_like("conv2d", input, weights, bias, stride, padding, 0, false, false);
}

VarId Tape::depthwise_conv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding) {
  return conv_like("depthwise_conv2d", input, weights, bias, stride, padding, 0, false, true);
}

VarId Tape::pointwise_conv2d(VarId input, VarId weights, std::optional<VarId> bias) {
  const auto& ws = value(weights).shape();
  if (ws.h != 1 || ws.w != 1) throw ShapeError("pointwise_conv2d", "kernel size", 1, ws.h);
  return conv_like("pointwise_conv2d", input, weights, bias, 1, 0, 0, false, false);
}

VarId Tape::tconv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding,
                    int output_padding) {
  return conv_like("tconv2d", input, weights, bias, stride, padding, output_padding, true, false);
}

VarId Tape::depthwise_tconv2d(VarId input, VarId weights, std::optional<VarId> bias, int stride, int padding,
                              int output_padding) {
  return conv_like("depthwise_tconv2d", input, weights, bias, stride, padding, output_padding, true, true);
}

VarId Tape::prelu(VarId input, VarId slopes) {
  const Tensor4& x = value(input);
  const Tensor4& a = value(slopes);
  Tensor4 out = dscjscc::prelu(x, a.data());
  const std::size_t xi = input.index;
  const std::size_t ai = slopes.index;
  auto fn = [this, xi, ai](const Tensor4& g, const std::vector<bool>& needed) {
    const Tensor4& xv = nodes_[xi].value;
    const Tensor4& av = nodes_[ai].value;
    const auto& s = xv.shape();
    std::vector<std::optional<Tensor4>> grads(2);
    if (needed[0]) {
      Tensor4 gx = g;
      for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
          const auto xp = xv.plane(n, c);
          auto gp = gx.plane(n, c);
          // Derivative 1 at exactly zero (positive branch).
          for (std::size_t i = 0; i < xp.size(); ++i) {
            if (xp[i] < 0.0) gp[i] *= av[c];
          }
        }
      }
      grads[0] = std::move(gx);
    }
    if (needed[1]) {
      Tensor4 ga({s.c, 1, 1, 1});
      for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
          const auto xp = xv.plane(n, c);
          const auto gp = g.plane(n, c);
          for (std::size_t i = 0; i < xp.size(); ++i) {
            if (xp[i] < 0.0) ga[c] += gp[i] * xp[i];
          }
        }
      }
      grads[1] = std::move(ga);
    }
    return grads;
  };
  return record(std::move(out), {input, slopes}, std::move(fn), "prelu");
}

VarId Tape::sigmoid(VarId input) {
  Tensor4 out = dscjscc::sigmoid(value(input));
  const std::size_t self = nodes_.size();
  auto fn = [this, self](const Tensor4& g, const std::vector<bool>&) {
    const Tensor4& y = nodes_[self].value;
    Tensor4 gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= y[i] * (1.0 - y[i]);
    return std::vector<std::optional<Tensor4>>{std::move(gx)};
  };
  return record(std::move(out), {input}, std::move(fn), "sigmoid");
}

VarId Tape::scale(VarId input, double factor) {
  Tensor4 out = value(input);
  out *= factor;
  auto fn = [factor](const Tensor4& g, const std::vector<bool>&) {
    Tensor4 gx = g;
    gx *= factor;
    return std::vector<std::optional<Tensor4>>{std::move(gx)};
  };
  return record(std::move(out), {input}, std::move(fn), "scale");
}

VarId Tape::mse(VarId a, VarId b) {
  const Tensor4& av = value(a);
  const Tensor4& bv = value(b);
  require_same_shape("mse", av.shape(), bv.shape());
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  const double count = static_cast<double>(av.size());
  Tensor4 out({1, 1, 1, 1}, acc / count);
  const std::size_t ai = a.index;
  const std::size_t bi = b.index;
  auto fn = [this, ai, bi, count](const Tensor4& g, const std::vector<bool>& needed) {
    const Tensor4& x = nodes_[ai].value;
    const Tensor4& y = nodes_[bi].value;
    const double s = 2.0 * g[0] / count;
    std::vector<std::optional<Tensor4>> grads(2);
    if (needed[0] || needed[1]) {
      Tensor4 diff(x.shape());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s * (x[i] - y[i]);
      if (needed[1]) {
        Tensor4 neg = diff;
        neg *= -1.0;
        grads[1] = std::move(neg);
      }
      if (needed[0]) grads[0] = std::move(diff);
    }
    return grads;
  };
  return record(std::move(out), {a, b}, std::move(fn), "mse");
}

GradRecord Tape::backward(VarId output, const Tensor4& upstream) const {
  const Node& out = node(output, "Tape::backward");
  require_same_shape("Tape::backward upstream", out.value.shape(), upstream.shape());

  std::vector<std::optional<Tensor4>> grads(nodes_.size());
  if (!out.requires_grad) return GradRecord(id_, std::move(grads));
  grads[output.index] = upstream;

  for (std::size_t i = output.index + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!grads[i] || !n.backward) continue;
    std::vector<bool> needed(n.parents.size());
    bool any = false;
    for (std::size_t p = 0; p < n.parents.size(); ++p) {
      needed[p] = nodes_[n.parents[p]].requires_grad;
      any = any || needed[p];
    }
    if (!any) continue;
    auto parent_grads = n.backward(*grads[i], needed);
    for (std::size_t p = 0; p < n.parents.size(); ++p) {
      if (!needed[p] || !parent_grads[p]) continue;
      auto& slot = grads[n.parents[p]];
      if (slot) {
        *slot += *parent_grads[p];
      } else {
        slot = std::move(parent_grads[p]);
      }
    }
  }
  // Only variables and nodes downstream of them keep gradients.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].requires_grad) grads[i].reset();
  }
  return GradRecord(id_, std::move(grads));
}

GradRecord Tape::backward(VarId output) const {
  const Node& out = node(output, "Tape::backward");
  return backward(output, Tensor4(out.value.shape(), 1.0));
}

}  // namespace dscjscc
