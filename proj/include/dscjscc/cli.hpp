#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dscjscc/architecture.hpp"
#include "dscjscc/train.hpp"

namespace dscjscc {

// Exact rational bandwidth ratio; decimals are read as exact decimal fractions.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

Ratio parse_ratio(std::string_view text);

// n = W*H*C, k = floor(rho*n), c = floor(2k / (H̄*W̄)).
struct Bandwidth {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t c = 0;
  Ratio rho;
  SpatialDims latent{};
  // Symbols the encoder actually emits: c*H̄*W̄/2 (<= k).
  std::size_t transmitted() const { return c * latent.h * latent.w / 2; }
  std::string str() const;
};

// Exactly one of rho and c may be given; if both are, they must agree.
// Neither given selects c = 8.
Bandwidth derive_bandwidth(InputShape input, std::optional<Ratio> rho, std::optional<std::size_t> c);

struct ExperimentConfig {
  VariantId variant = VariantId::R60E2D2;
  InputShape input{256, 256, 3};
  std::optional<Ratio> rho;
  std::optional<std::size_t> c;
  double transmit_power = 1.0;
  TrainConfig train;
  std::vector<double> snr_list{0, 5, 10, 15, 19};
  std::size_t draws_per_image = 3;
  std::optional<std::size_t> crop;
  std::string train_dir;
  std::string test_dir;
  std::string checkpoint;
  std::string out = ".";
  std::uint64_t seed = 0;

  Bandwidth bandwidth() const { return derive_bandwidth(input, rho, c); }
};

// Strict JSON parsing: unknown keys and wrong types are ConfigErrors.
ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base = {});
ExperimentConfig parse_config(const std::filesystem::path& path, ExperimentConfig base = {});

std::vector<double> parse_snr_list(std::string_view text);

// One row per variant: "<name>: enc <kinds>; dec <kinds>".
std::string variants_listing();

// Entry point shared by the executable and the tests; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dscjscc
