#include "dscjscc/channel.hpp"

#include <cmath>

namespace dscjscc {

double sigma_from_snr(double snr_db, double transmit_power) {
  if (!(transmit_power > 0.0)) throw ConfigError("sigma_from_snr: transmit power must be positive");
  return transmit_power * std::pow(10.0, -snr_db / 10.0);
}

ChannelConfig ChannelConfig::from_snr(double snr_db, std::uint64_t seed, double transmit_power) {
  ChannelConfig c;
  c.transmit_power = transmit_power;
  c.snr_db = snr_db;
  c.noise_power = sigma_from_snr(snr_db, transmit_power);
  c.seed = seed;
  return c;
}

ChannelConfig ChannelConfig::noise_free(std::uint64_t seed, double transmit_power) {
  ChannelConfig c;
  c.transmit_power = transmit_power;
  c.snr_db = INFINITY;
  c.noise_power = 0.0;
  c.seed = seed;
  c.noiseless = true;
  return c;
}

void ChannelConfig::validate() const {
  if (!(transmit_power > 0.0)) throw ConfigError("channel: transmit power must be positive");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) {
    throw ConfigError("channel: sigma^2 must be finite and non-negative");
  }
  if (noiseless && noise_power != 0.0) throw ConfigError("channel: noiseless mode requires sigma^2 = 0");
}

Channel::Channel(ChannelConfig config)
    : config_(config), rng_(config.seed), component_stddev_(std::sqrt(config.noise_power / 2.0)) {
  config_.validate();
  config_.noiseless = config_.noise_power == 0.0;
}

std::complex<double> Channel::draw_noise() {
  const double re = rng_.normal();
  const double im = rng_.normal();
  return {component_stddev_ * re, component_stddev_ * im};
}

std::complex<double> Channel::draw_gain() {
  const double re = rng_.normal();
  const double im = rng_.normal();
  return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
}

ComplexVector Channel::awgn(const ComplexVector& z) {
  if (config_.noiseless) return z;
  ComplexVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] + draw_noise();
  return out;
}

ComplexVector Channel::rayleigh_slow_fading(const ComplexVector& z, std::optional<std::complex<double>> fixed_gain) {
  const std::complex<double> h = fixed_gain ? *fixed_gain : draw_gain();
  ComplexVector faded(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) faded[i] = h * z[i];
  return awgn(faded);
}

VarId Channel::awgn(Tape& tape, VarId latent) {
  Tensor4 out = tape.value(latent);
  if (!config_.noiseless) {
    auto data = out.data();
    if (data.size() % 2 != 0) throw ShapeError("awgn: odd element count");
    for (std::size_t i = 0; i < data.size(); i += 2) {
      const auto n = draw_noise();
      data[i] += n.real();
      data[i + 1] += n.imag();
    }
  }
  auto fn = [](const Tensor4& g, const std::vector<bool>&) { return std::vector<std::optional<Tensor4>>{g}; };
  return tape.record(std::move(out), {latent}, std::move(fn), "awgn");
}

VarId Channel::rayleigh_slow_fading(Tape& tape, VarId latent) {
  const Tensor4& x = tape.value(latent);
  const std::size_t batch = x.shape().n;
  std::vector<std::complex<double>> gains(batch);
  Tensor4 faded = x;
  for (std::size_t n = 0; n < batch; ++n) {
    gains[n] = draw_gain();
    auto item = faded.item(n);
    if (item.size() % 2 != 0) throw ShapeError("rayleigh_slow_fading: odd element count");
    for (std::size_t i = 0; i < item.size(); i += 2) {
      const std::complex<double> s = gains[n] * std::complex<double>(item[i], item[i + 1]);
      item[i] = s.real();
      item[i + 1] = s.imag();
    }
  }
  auto fade_fn = [gains](const Tensor4& g, const std::vector<bool>&) {
    Tensor4 gx = g;
    for (std::size_t n = 0; n < gains.size(); ++n) {
      auto item = gx.item(n);
      const auto hc = std::conj(gains[n]);
      for (std::size_t i = 0; i < item.size(); i += 2) {
        const std::complex<double> s = hc * std::complex<double>(item[i], item[i + 1]);
        item[i] = s.real();
        item[i + 1] = s.imag();
      }
    }
    return std::vector<std::optional<Tensor4>>{std::move(gx)};
  };
  const VarId faded_id = tape.record(std::move(faded), {latent}, std::move(fade_fn), "rayleigh_gain");
  return awgn(tape, faded_id);
}

}  // namespace dscjscc
