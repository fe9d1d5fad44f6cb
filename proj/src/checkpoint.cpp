#include "dscjscc/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace dscjscc {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "DSCJ";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("checkpoint: truncated ") + what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* what) {
    const auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

json layer_to_json(const LayerSpec& l) {
  return {{"kind", layer_kind_name(l.kind)}, {"in_channels", l.in_channels}, {"out_channels", l.out_channels},
          {"kernel", l.kernel}, {"stride", l.stride}, {"padding", l.padding}, {"output_padding", l.output_padding},
          {"activation", activation_name(l.activation)}};
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec l;
  l.kind = parse_layer_kind(j.at("kind").get<std::string>());
  l.in_channels = j.at("in_channels").get<std::size_t>();
  l.out_channels = j.at("out_channels").get<std::size_t>();
  l.kernel = j.at("kernel").get<std::size_t>();
  l.stride = j.at("stride").get<int>();
  l.padding = j.at("padding").get<int>();
  l.output_padding = j.at("output_padding").get<int>();
  l.activation = parse_activation(j.at("activation").get<std::string>());
  return l;
}

json header_json(const CodecModel& model) {
  const auto& a = model.architecture();
  json enc = json::array();
  json dec = json::array();
  for (const auto& l : a.encoder) enc.push_back(layer_to_json(l));
  for (const auto& l : a.decoder) dec.push_back(layer_to_json(l));
  json j;
  j["architecture"] = {{"input", {{"width", a.input.width}, {"height", a.input.height}, {"channels", a.input.channels}}},
                       {"latent", {{"channels", a.latent_channels}, {"height", a.latent.h}, {"width", a.latent.w}}},
                       {"encoder", enc},
                       {"decoder", dec}};
  j["variant"] = model.variant() ? json(std::string(variant_name(*model.variant()))) : json(nullptr);
  j["rho"] = a.bandwidth_ratio();
  j["c"] = a.latent_channels;
  j["k"] = a.channel_symbols();
  j["n"] = a.source_symbols();
  j["transmit_power"] = model.transmit_power();
  return j;
}

}  // namespace

std::string serialize_checkpoint(const CodecModel& model) {
  std::string out(kMagic);
  put_u32(out, kCheckpointVersion);
  const std::string header = header_json(model).dump();
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    const auto& s = p.value.shape();
    put_u32(out, 4);
    for (std::size_t d : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : p.value.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

CodecModel deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4, "magic") != kMagic) throw FormatError("checkpoint: bad magic (not a DSCJ checkpoint)");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t header_len = r.u32("header length");
  json h;
  try {
    h = json::parse(r.take(header_len, "header"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  }

  ArchitectureSpec arch;
  std::optional<VariantId> variant;
  double power = 1.0;
  try {
    const auto& a = h.at("architecture");
    arch.input = {a.at("input").at("width").get<std::size_t>(), a.at("input").at("height").get<std::size_t>(),
                  a.at("input").at("channels").get<std::size_t>()};
    arch.latent_channels = a.at("latent").at("channels").get<std::size_t>();
    arch.latent = {a.at("latent").at("height").get<std::size_t>(), a.at("latent").at("width").get<std::size_t>()};
    const auto& enc = a.at("encoder");
    const auto& dec = a.at("decoder");
    if (enc.size() != kCodecDepth || dec.size() != kCodecDepth) throw FormatError("checkpoint: expected 5+5 layers");
    for (std::size_t i = 0; i < kCodecDepth; ++i) {
      arch.encoder[i] = layer_from_json(enc[i]);
      arch.decoder[i] = layer_from_json(dec[i]);
    }
    if (!h.at("variant").is_null()) variant = parse_variant(h.at("variant").get<std::string>());
    power = h.at("transmit_power").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: incomplete header: ") + e.what());
  }
  arch.validate();

  const std::uint32_t count = r.u32("tensor count");
  std::vector<Parameter> params;
  for (std::uint32_t t = 0; t < count; ++t) {
    Parameter p;
    p.name = std::string(r.take(r.u32("name length"), "name"));
    const std::uint32_t rank = r.u32("rank");
    if (rank != 4) throw FormatError("checkpoint: tensor '" + p.name + "' has rank " + std::to_string(rank));
    Shape4 s{r.u32("dims"), r.u32("dims"), r.u32("dims"), r.u32("dims")};
    std::vector<double> data(s.size());
    for (double& v : data) v = std::bit_cast<float>(r.u32("tensor data"));
    p.value = Tensor4(s, std::move(data));
    params.push_back(std::move(p));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes after last tensor");
  try {
    return CodecModel::from_parameters(std::move(arch), std::move(params), power, variant);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const CodecModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("checkpoint: cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("checkpoint: write to '" + path.string() + "' failed");
}

CodecModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace dscjscc
