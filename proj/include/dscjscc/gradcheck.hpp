#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dscjscc/tape.hpp"

namespace dscjscc {

enum class Primitive { Conv2d, DepthwiseConv2d, PointwiseConv2d, TConv2d, DepthwiseTConv2d, PReLU, Sigmoid };

std::string_view primitive_name(Primitive p);
const std::vector<Primitive>& all_primitives();

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t probes = 0;
  // Probes dropped because x +- step straddled a PReLU kink.
  std::size_t skipped = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const;
  std::size_t probes() const;
  std::size_t skipped() const;
};

struct NamedInput {
  std::string name;
  Tensor4 value;
};

// Builds a graph from the given leaves (recorded as variables, in order) and
// returns its output node.
using GraphBuilder = std::function<VarId(Tape&, const std::vector<VarId>&)>;

struct GradCheckOptions {
  double step = 1e-4;
  // Elements probed per input; 0 probes every element.
  std::size_t probes_per_input = 0;
  // Relative errors use max(|analytic|, |numeric|, floor) as denominator.
  double floor = 1e-3;
  std::uint64_t seed = 1;
  // Skip (and replace) probes whose +-step evaluations flip the sign of any
  // PReLU input; the difference quotient is meaningless across the kink.
  bool skip_kinks = true;
};

// Compares Tape::backward against central finite differences of the scalar
// <output, R> for a fixed random projection R.
GradCheckReport check_gradients(const GraphBuilder& build, const std::vector<NamedInput>& inputs,
                                const GradCheckOptions& options = {});

// Runs `trials` randomized checks (random shapes, hyperparameters, values) of
// one primitive. Deterministic in `seed`. PReLU inputs avoid |x| < 1e-2.
GradCheckReport finite_diff_check(Primitive op, int trials, std::uint64_t seed);

}  // namespace dscjscc
