#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dscjscc/channel.hpp"
#include "dscjscc/checkpoint.hpp"
#include "dscjscc/complexity.hpp"
#include "dscjscc/error.hpp"
#include "dscjscc/gradcheck.hpp"
#include "dscjscc/metrics.hpp"
#include "dscjscc/model.hpp"
#include "dscjscc/ops.hpp"

namespace py = pybind11;
using namespace dscjscc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

Tensor4 to_tensor(const Array& a) {
  if (a.ndim() != 4) throw ShapeError("expected a 4-d array (N, C, H, W), got " + std::to_string(a.ndim()) + "-d");
  const Shape4 s{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                 static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
  return Tensor4(s, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor4& t) {
  const Shape4& s = t.shape();
  Array out({s.n, s.c, s.h, s.w});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

ConvKernel kernel(const Array& w, std::optional<std::vector<double>> bias) { return {to_tensor(w), std::move(bias)}; }

ComplexArray to_complex_array(const std::vector<ComplexVector>& z) {
  const std::size_t k = z.empty() ? 0 : z.front().size();
  ComplexArray out({z.size(), k});
  auto* p = out.mutable_data();
  for (const auto& row : z) p = std::copy(row.begin(), row.end(), p);
  return out;
}

std::vector<ComplexVector> from_complex_array(const ComplexArray& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d complex array (N, k)");
  std::vector<ComplexVector> out(static_cast<std::size_t>(a.shape(0)));
  const auto* p = a.data();
  for (auto& row : out) {
    row.assign(p, p + a.shape(1));
    p += a.shape(1);
  }
  return out;
}

py::dict report_dict(const ComplexityReport& r) {
  py::list layers;
  for (const auto& row : r.rows) {
    py::dict d;
    d["layer"] = (row.encoder ? "enc" : "dec") + std::to_string(row.layer);
    d["kind"] = std::string(layer_kind_name(row.kind));
    d["out"] = py::make_tuple(row.out.h, row.out.w);
    d["params"] = row.params;
    d["flops"] = row.flops;
    layers.append(d);
  }
  py::dict d;
  d["model"] = r.model;
  d["params"] = r.total_params;
  d["flops"] = r.total_flops;
  d["params_k"] = r.params_display();
  d["flops_m"] = r.flops_display();
  d["layers"] = layers;
  return d;
}

Primitive parse_primitive(const std::string& name) {
  for (Primitive p : all_primitives()) {
    if (primitive_name(p) == name) return p;
  }
  throw ConfigError("unknown primitive '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Depthwise-separable deep JSCC: complexity accounting, codec ops, channel and metrics";

  // Translators run newest-first, so the base class goes in before its subclasses.
  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("variants", [] {
    std::vector<std::string> names;
    for (VariantId id : all_variants()) names.emplace_back(variant_name(id));
    return names;
  });
  m.def(
      "layer_kinds",
      [](const std::string& name) {
        const ArchitectureSpec a = build_variant(parse_variant(name), default_base_architecture(kReferenceInput, 8));
        return py::make_tuple(kind_pattern(a.encoder), kind_pattern(a.decoder));
      },
      py::arg("variant"));
  m.def(
      "analyze",
      [](const std::string& name, const std::string& input, std::size_t c) {
        return report_dict(model_complexity(parse_variant(name), parse_input_shape(input), c));
      },
      py::arg("variant"), py::arg("input") = "256x256x3", py::arg("c") = 8);
  m.def(
      "reduction",
      [](const std::string& a, const std::string& b) {
        const Reduction r = reduction_report(parse_variant(a), parse_variant(b));
        return py::make_tuple(r.params_percent, r.flops_percent);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "conv2d",
      [](const Array& x, const Array& w, std::optional<std::vector<double>> b, int stride, int padding) {
        return to_array(conv2d(to_tensor(x), kernel(w, std::move(b)), stride, padding));
      },
      py::arg("x"), py::arg("weights"), py::arg("bias") = py::none(), py::arg("stride") = 1, py::arg("padding") = 0);
  m.def(
      "depthwise_conv2d",
      [](const Array& x, const Array& w, std::optional<std::vector<double>> b, int stride, int padding) {
        return to_array(depthwise_conv2d(to_tensor(x), kernel(w, std::move(b)), stride, padding));
      },
      py::arg("x"), py::arg("weights"), py::arg("bias") = py::none(), py::arg("stride") = 1, py::arg("padding") = 0);
  m.def(
      "pointwise_conv2d",
      [](const Array& x, const Array& w, std::optional<std::vector<double>> b) {
        return to_array(pointwise_conv2d(to_tensor(x), kernel(w, std::move(b))));
      },
      py::arg("x"), py::arg("weights"), py::arg("bias") = py::none());
  m.def(
      "tconv2d",
      [](const Array& x, const Array& w, std::optional<std::vector<double>> b, int stride, int padding,
         int output_padding) {
        return to_array(tconv2d(to_tensor(x), kernel(w, std::move(b)), stride, padding, output_padding));
      },
      py::arg("x"), py::arg("weights"), py::arg("bias") = py::none(), py::arg("stride") = 1, py::arg("padding") = 0,
      py::arg("output_padding") = 0);
  m.def(
      "depthwise_tconv2d",
      [](const Array& x, const Array& w, std::optional<std::vector<double>> b, int stride, int padding,
         int output_padding) {
        return to_array(depthwise_tconv2d(to_tensor(x), kernel(w, std::move(b)), stride, padding, output_padding));
      },
      py::arg("x"), py::arg("weights"), py::arg("bias") = py::none(), py::arg("stride") = 1, py::arg("padding") = 0,
      py::arg("output_padding") = 0);
  m.def(
      "prelu", [](const Array& x, const std::vector<double>& slopes) { return to_array(prelu(to_tensor(x), slopes)); },
      py::arg("x"), py::arg("slopes"));
  m.def(
      "sigmoid", [](const Array& x) { return to_array(sigmoid(to_tensor(x))); }, py::arg("x"));
  m.def(
      "finite_diff_check",
      [](const std::string& op, int trials, std::uint64_t seed) {
        return finite_diff_check(parse_primitive(op), trials, seed).max_rel_error();
      },
      py::arg("op"), py::arg("trials") = 10, py::arg("seed") = 7);

  m.def("sigma_from_snr", &sigma_from_snr, py::arg("snr_db"), py::arg("transmit_power") = 1.0);
  m.def(
      "awgn",
      [](const ComplexArray& z, double noise_power, std::uint64_t seed) {
        ChannelConfig cfg;
        cfg.noise_power = noise_power;
        cfg.seed = seed;
        Channel ch(cfg);
        std::vector<ComplexVector> rows = from_complex_array(z);
        for (auto& row : rows) row = ch.awgn(row);
        return to_complex_array(rows);
      },
      py::arg("z"), py::arg("noise_power"), py::arg("seed") = 0);
  m.def(
      "power_normalize",
      [](const std::vector<std::complex<double>>& z, double power) { return power_normalize(z, z.size(), power); },
      py::arg("z"), py::arg("transmit_power") = 1.0);
  m.def(
      "psnr", [](const Array& a, const Array& b) { return psnr(to_tensor(a), to_tensor(b)); }, py::arg("x"),
      py::arg("y"));

  py::class_<CodecModel>(m, "Codec")
      .def(py::init([](const std::string& variant, const std::string& input, std::size_t c, std::uint64_t seed,
                       double power) {
             const VariantId id = parse_variant(variant);
             return CodecModel(build_variant(id, default_base_architecture(parse_input_shape(input), c)), seed, power,
                               id);
           }),
           py::arg("variant") = "dsc-jscc-60-e2d2", py::arg("input") = "32x32x3", py::arg("c") = 8,
           py::arg("seed") = 0, py::arg("transmit_power") = 1.0)
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"))
      .def("save", [](const CodecModel& c, const std::filesystem::path& p) { save_checkpoint(c, p); }, py::arg("path"))
      .def_property_readonly("k", &CodecModel::channel_symbols)
      .def_property_readonly("parameter_count", [](const CodecModel& c) { return oracle_param_count(c); })
      .def_property_readonly("variant",
                             [](const CodecModel& c) -> std::optional<std::string> {
                               if (!c.variant()) return std::nullopt;
                               return std::string(variant_name(*c.variant()));
                             })
      .def(
          "encode", [](const CodecModel& c, const Array& x) { return to_complex_array(c.encode(to_tensor(x))); },
          py::arg("images"))
      .def(
          "decode", [](const CodecModel& c, const ComplexArray& z) { return to_array(c.decode(from_complex_array(z))); },
          py::arg("symbols"));
}
