#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "dscjscc/model.hpp"
#include "dscjscc/rng.hpp"
#include "dscjscc/tape.hpp"

namespace dscjscc {

// sigma^2 = P * 10^(-snr_db / 10)
double sigma_from_snr(double snr_db, double transmit_power = 1.0);

// Noise power is per complex symbol (sigma^2 / 2 per real component).
struct ChannelConfig {
  double transmit_power = 1.0;
  double noise_power = 0.0;  // sigma^2; zero makes the channel an identity
  double snr_db = 0.0;       // informational, set by from_snr
  std::uint64_t seed = 0;
  bool noiseless = false;

  static ChannelConfig from_snr(double snr_db, std::uint64_t seed, double transmit_power = 1.0);
  static ChannelConfig noise_free(std::uint64_t seed = 0, double transmit_power = 1.0);

  // Throws ConfigError for non-positive power or negative/non-finite sigma^2.
  void validate() const;
};

// One channel realization stream. Not shareable across threads; give each
// worker its own instance.
class Channel {
 public:
  explicit Channel(ChannelConfig config);

  const ChannelConfig& config() const { return config_; }

  // z + n, n ~ CN(0, sigma^2 I).
  ComplexVector awgn(const ComplexVector& z);
  // h z + n with one h ~ CN(0,1) per vector. `fixed_gain` overrides the draw.
  ComplexVector rayleigh_slow_fading(const ComplexVector& z, std::optional<std::complex<double>> fixed_gain = std::nullopt);

  // Tape versions act on a real latent (N,c,H,W) whose adjacent scalar pairs
  // are complex symbols. Noise is a constant: gradients pass through unchanged.
  VarId awgn(Tape& tape, VarId latent);
  // Gradient is conj(h) times the upstream gradient, per batch item.
  VarId rayleigh_slow_fading(Tape& tape, VarId latent);

  std::complex<double> draw_gain();

 private:
  std::complex<double> draw_noise();

  ChannelConfig config_;
  Rng rng_;
  double component_stddev_;
};

}  // namespace dscjscc
