#include "dscjscc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dscjscc/ops.hpp"
#include "dscjscc/rng.hpp"

namespace dscjscc {

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Conv2d: return "conv2d";
    case Primitive::DepthwiseConv2d: return "depthwise_conv2d";
    case Primitive::PointwiseConv2d: return "pointwise_conv2d";
    case Primitive::TConv2d: return "tconv2d";
    case Primitive::DepthwiseTConv2d: return "depthwise_tconv2d";
    case Primitive::PReLU: return "prelu";
    case Primitive::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

const std::vector<Primitive>& all_primitives() {
  static const std::vector<Primitive> all{Primitive::Conv2d,  Primitive::DepthwiseConv2d,
                                          Primitive::PointwiseConv2d, Primitive::TConv2d,
                                          Primitive::DepthwiseTConv2d, Primitive::PReLU,
                                          Primitive::Sigmoid};
  return all;
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

std::size_t GradCheckReport::probes() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.probes;
  return n;
}

std::size_t GradCheckReport::skipped() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.skipped;
  return n;
}

namespace {

struct Evaluation {
  double value = 0.0;
  std::vector<bool> kink_side;
};

Evaluation evaluate(const GraphBuilder& build, const std::vector<NamedInput>& inputs, const Tensor4& projection) {
  Tape tape;
  std::vector<VarId> leaves;
  leaves.reserve(inputs.size());
  for (const auto& in : inputs) leaves.push_back(tape.variable(in.value));
  Evaluation e;
  e.value = dot(tape.value(build(tape, leaves)), projection);
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const VarId v = tape.at(i);
    if (tape.name(v) != "prelu") continue;
    for (double x : tape.value(tape.parents(v).front()).values()) e.kink_side.push_back(x > 0.0);
  }
  return e;
}

}  // namespace

GradCheckReport check_gradients(const GraphBuilder& build, const std::vector<NamedInput>& inputs,
                                const GradCheckOptions& options) {
  Rng rng(options.seed);
  Tape tape;
  std::vector<VarId> leaves;
  for (const auto& in : inputs) leaves.push_back(tape.variable(in.value));
  const VarId out = build(tape, leaves);
  const Tensor4 projection = Tensor4::normal(tape.value(out).shape(), rng);
  const GradRecord grads = tape.backward(out, projection);
  const std::vector<bool> base_side = evaluate(build, inputs, projection).kink_side;

  GradCheckReport report;
  std::vector<NamedInput> work = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor4 zero(inputs[i].value.shape());
    const Tensor4& analytic = grads.has(leaves[i]) ? grads.at(leaves[i]) : zero;

    // Lazy Fisher-Yates: candidates are drawn in random order until enough probes land.
    std::vector<std::size_t> order(inputs[i].value.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t wanted = options.probes_per_input == 0 ? order.size()
                                                             : std::min(options.probes_per_input, order.size());
    const bool sample = wanted < order.size();

    GradCheckEntry entry{inputs[i].name, 0.0, 0, 0};
    for (std::size_t j = 0; j < order.size() && entry.probes < wanted; ++j) {
      if (sample) std::swap(order[j], order[j + rng.below(order.size() - j)]);
      const std::size_t idx = order[j];
      const double original = work[i].value[idx];
      work[i].value[idx] = original + options.step;
      const Evaluation plus = evaluate(build, work, projection);
      work[i].value[idx] = original - options.step;
      const Evaluation minus = evaluate(build, work, projection);
      work[i].value[idx] = original;

      if (options.skip_kinks && (plus.kink_side != base_side || minus.kink_side != base_side)) {
        ++entry.skipped;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * options.step);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a - numeric) / denom);
      ++entry.probes;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

Tensor4 away_from_zero(Shape4 shape, Rng& rng) {
  Tensor4 t(shape);
  for (double& v : t.data()) {
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (std::abs(v) < 1e-2);
  }
  return t;
}

struct Trial {
  std::vector<NamedInput> inputs;
  GraphBuilder build;
};

Trial make_trial(Primitive op, Rng& rng) {
  const std::string base(primitive_name(op));
  const std::size_t n = pick(rng, 1, 2);
  switch (op) {
    case Primitive::Conv2d:
    case Primitive::DepthwiseConv2d: {
      const bool dw = op == Primitive::DepthwiseConv2d;
      const std::size_t cin = pick(rng, 1, 3);
      const std::size_t cout = dw ? cin : pick(rng, 1, 3);
      const std::size_t k = pick(rng, 1, 3);
      const int stride = static_cast<int>(pick(rng, 1, 2));
      const int pad = static_cast<int>(pick(rng, 0, k - 1));
      const std::size_t h = pick(rng, k, 6);
      const std::size_t w = pick(rng, k, 6);
      Trial t;
      t.inputs = {{base + ".input", Tensor4::uniform({n, cin, h, w}, rng, -1, 1)},
                  {base + ".weights", Tensor4::uniform({cout, dw ? 1 : cin, k, k}, rng, -1, 1)},
                  {base + ".bias", Tensor4::uniform({cout, 1, 1, 1}, rng, -1, 1)}};
      t.build = [dw, stride, pad](Tape& tape, const std::vector<VarId>& v) {
        return dw ? tape.depthwise_conv2d(v[0], v[1], v[2], stride, pad) : tape.conv2d(v[0], v[1], v[2], stride, pad);
      };
      return t;
    }
    case Primitive::PointwiseConv2d: {
      const std::size_t cin = pick(rng, 1, 4);
      const std::size_t cout = pick(rng, 1, 4);
      const std::size_t h = pick(rng, 1, 5);
      const std::size_t w = pick(rng, 1, 5);
      Trial t;
      t.inputs = {{base + ".input", Tensor4::uniform({n, cin, h, w}, rng, -1, 1)},
                  {base + ".weights", Tensor4::uniform({cout, cin, 1, 1}, rng, -1, 1)},
                  {base + ".bias", Tensor4::uniform({cout, 1, 1, 1}, rng, -1, 1)}};
      t.build = [](Tape& tape, const std::vector<VarId>& v) { return tape.pointwise_conv2d(v[0], v[1], v[2]); };
      return t;
    }
    case Primitive::TConv2d:
    case Primitive::DepthwiseTConv2d: {
      const bool dw = op == Primitive::DepthwiseTConv2d;
      const std::size_t cin = pick(rng, 1, 3);
      const std::size_t cout = dw ? cin : pick(rng, 1, 3);
      const std::size_t k = pick(rng, 1, 4);
      const int stride = static_cast<int>(pick(rng, 1, 3));
      const int out_pad = static_cast<int>(pick(rng, 0, static_cast<std::size_t>(stride - 1)));
      const int pad = static_cast<int>(pick(rng, 0, (k - 1) / 2));
      const std::size_t h = pick(rng, 1, 4);
      const std::size_t w = pick(rng, 1, 4);
      Trial t;
      t.inputs = {{base + ".input", Tensor4::uniform({n, cin, h, w}, rng, -1, 1)},
                  {base + ".weights", Tensor4::uniform({cin, dw ? 1 : cout, k, k}, rng, -1, 1)},
                  {base + ".bias", Tensor4::uniform({cout, 1, 1, 1}, rng, -1, 1)}};
      t.build = [dw, stride, pad, out_pad](Tape& tape, const std::vector<VarId>& v) {
        return dw ? tape.depthwise_tconv2d(v[0], v[1], v[2], stride, pad, out_pad)
                  : tape.tconv2d(v[0], v[1], v[2], stride, pad, out_pad);
      };
      return t;
    }
    case Primitive::PReLU: {
      const std::size_t c = pick(rng, 1, 4);
      Trial t;
      t.inputs = {{base + ".input", away_from_zero({n, c, pick(rng, 1, 5), pick(rng, 1, 5)}, rng)},
                  {base + ".slopes", Tensor4::uniform({c, 1, 1, 1}, rng, 0.0, 1.0)}};
      t.build = [](Tape& tape, const std::vector<VarId>& v) { return tape.prelu(v[0], v[1]); };
      return t;
    }
    case Primitive::Sigmoid: {
      Trial t;
      t.inputs = {{base + ".input", Tensor4::uniform({n, pick(rng, 1, 4), pick(rng, 1, 5), pick(rng, 1, 5)}, rng, -4, 4)}};
      t.build = [](Tape& tape, const std::vector<VarId>& v) { return tape.sigmoid(v[0]); };
      return t;
    }
  }
  throw Error("finite_diff_check: unknown primitive");
}

}  // namespace

GradCheckReport finite_diff_check(Primitive op, int trials, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::string, GradCheckEntry> merged;
  std::vector<std::string> order;
  for (int i = 0; i < trials; ++i) {
    Trial trial = make_trial(op, rng);
    GradCheckOptions opts;
    opts.seed = rng.next_u64();
    for (auto& e : check_gradients(trial.build, trial.inputs, opts).entries) {
      auto [it, inserted] = merged.try_emplace(e.name, GradCheckEntry{e.name, 0.0, 0});
      if (inserted) order.push_back(e.name);
      it->second.max_rel_error = std::max(it->second.max_rel_error, e.max_rel_error);
      it->second.probes += e.probes;
    }
  }
  GradCheckReport report;
  for (const auto& name : order) report.entries.push_back(merged.at(name));
  return report;
}

}  // namespace dscjscc
