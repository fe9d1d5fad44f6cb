#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "dscjscc/architecture.hpp"
#include "dscjscc/channel.hpp"
#include "dscjscc/gradcheck.hpp"
#include "dscjscc/model.hpp"
#include "dscjscc/ops.hpp"
#include "dscjscc/rng.hpp"
#include "dscjscc/tensor.hpp"

namespace testsupport {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dscjscc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Direct six-loop convolution, no shared code with the library kernels.
inline dscjscc::Tensor4 naive_conv2d(const dscjscc::Tensor4& x, const dscjscc::Tensor4& w,
                                     const std::vector<double>& bias, int stride, int pad) {
  const auto xs = x.shape();
  const auto ws = w.shape();
  const long oh = (static_cast<long>(xs.h) + 2 * pad - static_cast<long>(ws.h)) / stride + 1;
  const long ow = (static_cast<long>(xs.w) + 2 * pad - static_cast<long>(ws.w)) / stride + 1;
  dscjscc::Tensor4 y({xs.n, ws.n, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o)
      for (long i = 0; i < oh; ++i)
        for (long j = 0; j < ow; ++j) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t a = 0; a < ws.h; ++a)
              for (std::size_t b = 0; b < ws.w; ++b) {
                const long r = i * stride - pad + static_cast<long>(a);
                const long s = j * stride - pad + static_cast<long>(b);
                if (r < 0 || s < 0 || r >= static_cast<long>(xs.h) || s >= static_cast<long>(xs.w)) continue;
                acc += x(n, c, r, s) * w(o, c, a, b);
              }
          y(n, o, i, j) = acc;
        }
  return y;
}

// Expand a depthwise kernel (C,1,K,K) into a dense block-diagonal (C,C,K,K) kernel.
inline dscjscc::Tensor4 block_diagonal(const dscjscc::Tensor4& dw) {
  const auto s = dw.shape();
  dscjscc::Tensor4 full({s.n, s.n, s.h, s.w});
  for (std::size_t c = 0; c < s.n; ++c)
    for (std::size_t a = 0; a < s.h; ++a)
      for (std::size_t b = 0; b < s.w; ++b) full(c, c, a, b) = dw(c, 0, a, b);
  return full;
}

// Allocate every tensor a layer needs, push a probe input through the real ops
// (which reject wrong shapes), and count the scalars.
inline std::uint64_t enumerate_layer_params(const dscjscc::LayerSpec& l, dscjscc::Rng& rng) {
  using namespace dscjscc;
  const std::size_t in_hw = 2 * l.kernel + 3;
  Tensor4 x = Tensor4::uniform({1, l.in_channels, in_hw, in_hw}, rng, -1, 1);
  std::uint64_t count = 0;
  auto vec = [&](std::size_t n) {
    count += n;
    return std::vector<double>(n, 0.1);
  };
  auto ten = [&](Shape4 s) {
    count += s.size();
    return Tensor4::uniform(s, rng, -1, 1);
  };
  Tensor4 y;
  switch (l.kind) {
    case LayerKind::Conv:
      y = conv2d(x, {ten({l.out_channels, l.in_channels, l.kernel, l.kernel}), vec(l.out_channels)}, l.stride,
                 l.padding);
      break;
    case LayerKind::TConv:
      y = tconv2d(x, {ten({l.in_channels, l.out_channels, l.kernel, l.kernel}), vec(l.out_channels)}, l.stride,
                  l.padding, l.output_padding);
      break;
    case LayerKind::DSConv: {
      Tensor4 d = depthwise_conv2d(x, {ten({l.in_channels, 1, l.kernel, l.kernel}), vec(l.in_channels)}, l.stride,
                                   l.padding);
      y = pointwise_conv2d(d, {ten({l.out_channels, l.in_channels, 1, 1}), vec(l.out_channels)});
      break;
    }
    case LayerKind::DSTConv: {
      Tensor4 d = depthwise_tconv2d(x, {ten({l.in_channels, 1, l.kernel, l.kernel}), vec(l.in_channels)}, l.stride,
                                    l.padding, l.output_padding);
      y = pointwise_conv2d(d, {ten({l.out_channels, l.in_channels, 1, 1}), vec(l.out_channels)});
      break;
    }
  }
  if (l.activation == Activation::PReLU) {
    const auto slopes = vec(l.out_channels);
    y = prelu(y, slopes);
  }
  return count;
}

inline dscjscc::LayerSpec random_layer(dscjscc::Rng& rng) {
  using namespace dscjscc;
  LayerSpec l;
  l.kind = static_cast<LayerKind>(rng.below(4));
  l.in_channels = 1 + rng.below(48);
  l.out_channels = 1 + rng.below(48);
  l.kernel = 1 + rng.below(7);
  l.stride = 1 + static_cast<int>(rng.below(3));
  l.padding = static_cast<int>(rng.below(l.kernel));
  l.output_padding = is_transposed(l.kind) ? static_cast<int>(rng.below(static_cast<std::uint64_t>(l.stride))) : 0;
  l.activation = static_cast<Activation>(rng.below(3));
  return l;
}

// Finite-difference check of the loss through encode -> noiseless channel ->
// decode -> MSE on a tiny model with generic (non-zero) biases and slopes.
inline dscjscc::GradCheckReport end_to_end_check(dscjscc::VariantId id, std::uint64_t seed,
                                                 std::size_t probes_per_input = 5) {
  using namespace dscjscc;
  CodecModel m(build_variant(id, default_base_architecture({8, 8, 3}, 2)), seed);
  Rng rng(derive_seed(seed, 1));
  for (auto& p : m.parameters()) {
    if (p.name.ends_with("bias")) p.value = Tensor4::uniform(p.value.shape(), rng, -0.2, 0.2);
    if (p.name.ends_with("prelu")) p.value = Tensor4::uniform(p.value.shape(), rng, 0.05, 0.5);
  }
  const Tensor4 x = normalize_pixels(Tensor4::uniform({2, 3, 8, 8}, rng, 0, 255));
  std::vector<NamedInput> inputs;
  for (const auto& p : m.parameters()) inputs.push_back({p.name, p.value});
  GradCheckOptions opt;
  opt.probes_per_input = probes_per_input;
  opt.floor = 1e-8;
  opt.seed = derive_seed(seed, 2);
  return check_gradients(
      [&](Tape& tape, const std::vector<VarId>& params) {
        Channel ch(ChannelConfig::noise_free());
        const VarId z = ch.awgn(tape, m.encoder_graph(tape, params, tape.constant(x)));
        return tape.mse(m.decoder_graph(tape, params, z), tape.constant(x));
      },
      inputs, opt);
}

}  // namespace testsupport
