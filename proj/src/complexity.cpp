#include "dscjscc/complexity.hpp"

#include <cstdio>
#include <sstream>

#include "dscjscc/model.hpp"

namespace dscjscc {

std::uint64_t layer_params(const LayerSpec& l) {
  const std::uint64_t k2 = static_cast<std::uint64_t>(l.kernel) * l.kernel;
  const std::uint64_t cin = l.in_channels;
  const std::uint64_t cout = l.out_channels;
  std::uint64_t p = is_separable(l.kind) ? (k2 * cin + cin) + (cin * cout + cout) : k2 * cin * cout + cout;
  if (l.activation == Activation::PReLU) p += cout;
  return p;
}

std::uint64_t layer_flops(const LayerSpec& l, SpatialDims out) {
  const std::uint64_t k2 = static_cast<std::uint64_t>(l.kernel) * l.kernel;
  const std::uint64_t area = static_cast<std::uint64_t>(out.h) * out.w;
  const std::uint64_t cin = l.in_channels;
  const std::uint64_t cout = l.out_channels;
  if (is_separable(l.kind)) return k2 * cin * area + cin * cout * area;
  return k2 * cin * cout * area;
}

std::uint64_t round_half_up_digitwise(std::uint64_t value, unsigned digits) {
  for (unsigned i = 0; i < digits; ++i) value = (value + 5) / 10;
  return value;
}

std::uint64_t round_half_up(std::uint64_t value, unsigned digits) {
  std::uint64_t unit = 1;
  for (unsigned i = 0; i < digits; ++i) unit *= 10;
  return (value + unit / 2) / unit;
}

std::string format_tenths(std::uint64_t tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

ComplexityReport analyze_architecture(const ArchitectureSpec& arch, std::string name) {
  arch.validate();
  ComplexityReport r;
  r.model = std::move(name);
  const auto dims = arch.layer_output_dims();
  for (std::size_t i = 0; i < 2 * kCodecDepth; ++i) {
    const bool enc = i < kCodecDepth;
    const LayerSpec& l = enc ? arch.encoder[i] : arch.decoder[i - kCodecDepth];
    ComplexityRow row{enc, (i % kCodecDepth) + 1, l.kind, dims[i], layer_params(l), layer_flops(l, dims[i])};
    r.total_params += row.params;
    r.total_flops += row.flops;
    r.flops_tenths_m += round_half_up(row.flops, 5);
    r.rows.push_back(row);
  }
  r.params_tenths_k = round_half_up_digitwise(r.total_params, 2);
  return r;
}

ComplexityReport model_complexity(VariantId id, InputShape input, std::size_t latent_channels) {
  return analyze_architecture(build_variant(id, default_base_architecture(input, latent_channels)),
                              std::string(variant_name(id)));
}

Reduction reduction_report(const ComplexityReport& a, const ComplexityReport& b) {
  auto pct = [](std::uint64_t from, std::uint64_t to) {
    return 100.0 * (static_cast<double>(from) - static_cast<double>(to)) / static_cast<double>(from);
  };
  return {pct(a.total_params, b.total_params), pct(a.total_flops, b.total_flops)};
}

Reduction reduction_report(VariantId a, VariantId b, InputShape input, std::size_t latent_channels) {
  return reduction_report(model_complexity(a, input, latent_channels), model_complexity(b, input, latent_channels));
}

std::uint64_t oracle_param_count(const CodecModel& model) {
  std::uint64_t count = 0;
  for (const auto& p : model.parameters()) {
    for ([[maybe_unused]] double v : p.value.data()) ++count;
  }
  return count;
}

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace

std::string complexity_summary_text(const std::vector<ComplexityReport>& reports) {
  std::string out = fmt("%-20s %12s %12s %12s %14s\n", "model", "params (K)", "FLOPs (M)", "params", "FLOPs");
  for (const auto& r : reports) {
    out += fmt("%-20s %12s %12s %12llu %14llu\n", r.model.c_str(), r.params_display().c_str(),
               r.flops_display().c_str(), static_cast<unsigned long long>(r.total_params),
               static_cast<unsigned long long>(r.total_flops));
  }
  return out;
}

std::string complexity_layer_text(const ComplexityReport& r) {
  std::string out = fmt("%-8s %-8s %9s %10s %14s\n", "layer", "kind", "output", "params", "FLOPs");
  for (const auto& row : r.rows) {
    const std::string name = std::string(row.encoder ? "enc" : "dec") + std::to_string(row.layer);
    const std::string dims = std::to_string(row.out.h) + "x" + std::to_string(row.out.w);
    out += fmt("%-8s %-8s %9s %10llu %14llu\n", name.c_str(), std::string(layer_kind_name(row.kind)).c_str(),
               dims.c_str(), static_cast<unsigned long long>(row.params), static_cast<unsigned long long>(row.flops));
  }
  out += fmt("%-8s %-8s %9s %10llu %14llu\n", "total", "", "", static_cast<unsigned long long>(r.total_params),
             static_cast<unsigned long long>(r.total_flops));
  out += r.model + ": " + r.params_display() + " K / " + r.flops_display() + " M\n";
  return out;
}

std::string complexity_csv(const std::vector<ComplexityReport>& reports) {
  std::ostringstream os;
  os << "variant,params,flops,params_display,flops_display\n";
  for (const auto& r : reports) {
    os << r.model << ',' << r.total_params << ',' << r.total_flops << ',' << r.params_display() << ','
       << r.flops_display() << '\n';
  }
  return os.str();
}

}  // namespace dscjscc
