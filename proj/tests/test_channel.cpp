#include "doctest.h"

#include <cmath>

#include "dscjscc/channel.hpp"
#include "dscjscc/error.hpp"

using namespace dscjscc;

namespace {

ComplexVector random_symbols(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ComplexVector z(n);
  for (auto& v : z) v = {rng.normal(), rng.normal()};
  return z;
}

}  // namespace

TEST_CASE("sigma from SNR") {
  CHECK(sigma_from_snr(0.0, 1.0) == 1.0);
  CHECK(sigma_from_snr(10.0, 1.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(sigma_from_snr(19.0, 1.0) == doctest::Approx(0.012589254117941673).epsilon(1e-12));
  CHECK(sigma_from_snr(10.0, 2.0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("config validation") {
  ChannelConfig c = ChannelConfig::from_snr(5, 1);
  CHECK_NOTHROW(c.validate());
  c.noise_power = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(ChannelConfig::from_snr(5, 1, 0.0), ConfigError);
}

TEST_CASE("zero noise is the identity") {
  const ComplexVector z = random_symbols(1000, 1);
  Channel ch(ChannelConfig::noise_free(3));
  CHECK(ch.awgn(z) == z);
  ChannelConfig zero;
  zero.noise_power = 0.0;
  Channel ch2(zero);
  CHECK(ch2.awgn(z) == z);
  CHECK(ch.rayleigh_slow_fading(z, std::complex<double>(1.0, 0.0)) == z);
}

TEST_CASE("AWGN statistics over a million symbols") {
  const std::size_t n = 1'000'000;
  const ComplexVector z(n, {0.3, -0.7});
  ChannelConfig cfg;
  cfg.noise_power = 0.5;
  cfg.seed = 42;
  Channel ch(cfg);
  const ComplexVector y = ch.awgn(z);
  double var = 0.0, mean_re = 0.0, mean_im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = y[i] - z[i];
    var += std::norm(d);
    mean_re += d.real();
    mean_im += d.imag();
  }
  var /= n;
  mean_re /= n;
  mean_im /= n;
  CHECK(std::abs(var - 0.5) / 0.5 < 0.02);
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(mean_re) < 3 * se);
  CHECK(std::abs(mean_im) < 3 * se);
}

TEST_CASE("AWGN is mean-preserving over repeated draws") {
  const ComplexVector z{{1.0, -2.0}};
  ChannelConfig cfg;
  cfg.noise_power = 1.0;
  cfg.seed = 5;
  Channel ch(cfg);
  const std::size_t draws = 100'000;
  std::complex<double> acc{};
  for (std::size_t i = 0; i < draws; ++i) acc += ch.awgn(z)[0];
  acc /= static_cast<double>(draws);
  const double se = std::sqrt(0.5 / draws);
  CHECK(std::abs(acc.real() - 1.0) < 5 * se);
  CHECK(std::abs(acc.imag() + 2.0) < 5 * se);
}

TEST_CASE("seeded channels replay") {
  const ComplexVector z = random_symbols(64, 2);
  const ChannelConfig cfg = ChannelConfig::from_snr(3.0, 77);
  Channel a(cfg), b(cfg);
  CHECK(a.awgn(z) == b.awgn(z));
  CHECK(a.rayleigh_slow_fading(z) == b.rayleigh_slow_fading(z));
  Channel c(ChannelConfig::from_snr(3.0, 78));
  Channel d(cfg);
  CHECK(c.awgn(z) != d.awgn(z));
}

TEST_CASE("Rayleigh gain statistics and slow fading") {
  Channel ch(ChannelConfig::noise_free(9));
  double acc = 0.0;
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(ch.draw_gain());
  CHECK(std::abs(acc / n - 1.0) < 0.02);

  const ComplexVector z = random_symbols(50, 4);
  const ComplexVector y = ch.rayleigh_slow_fading(z);
  const auto h = y[0] / z[0];
  for (std::size_t i = 1; i < z.size(); ++i) CHECK(std::abs(y[i] / z[i] - h) < 1e-12);
}

TEST_CASE("gradients pass through AWGN unchanged") {
  Rng rng(3);
  Tape tape;
  const VarId x = tape.variable(Tensor4::uniform({2, 4, 2, 2}, rng, -1, 1));
  Channel ch(ChannelConfig::from_snr(0.0, 11));
  const VarId y = ch.awgn(tape, x);
  CHECK(tape.value(y) != tape.value(x));
  const Tensor4 up = Tensor4::uniform({2, 4, 2, 2}, rng, -1, 1);
  CHECK(tape.backward(y, up).at(x) == up);
}

TEST_CASE("Rayleigh tape gradient multiplies by the conjugate gain") {
  Rng rng(8);
  const Tensor4 value = Tensor4::uniform({1, 2, 1, 2}, rng, -1, 1);
  Tape tape;
  const VarId x = tape.variable(value);
  Channel ch(ChannelConfig::noise_free(21));
  const VarId y = ch.rayleigh_slow_fading(tape, x);
  // Recover h from the first symbol, then check the adjoint identity Re<h z, u> = Re<z, conj(h) u>.
  const std::complex<double> z0(value[0], value[1]), y0(tape.value(y)[0], tape.value(y)[1]);
  const std::complex<double> h = y0 / z0;
  const Tensor4 up = Tensor4::uniform(value.shape(), rng, -1, 1);
  const Tensor4 g = tape.backward(y, up).at(x);
  for (std::size_t i = 0; i < 4; i += 2) {
    const std::complex<double> u(up[i], up[i + 1]);
    const std::complex<double> expect = std::conj(h) * u;
    CHECK(g[i] == doctest::Approx(expect.real()).epsilon(1e-12));
    CHECK(g[i + 1] == doctest::Approx(expect.imag()).epsilon(1e-12));
  }
}
