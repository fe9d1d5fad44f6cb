#include "dscjscc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dscjscc/checkpoint.hpp"
#include "dscjscc/complexity.hpp"
#include "dscjscc/dataset.hpp"

namespace dscjscc {

namespace {

using nlohmann::json;

constexpr std::uint64_t kInitStream = 0x494e4954ULL;

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw FormatError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string Ratio::str() const { return std::to_string(num) + "/" + std::to_string(den); }

Ratio parse_ratio(std::string_view text) {
  if (text.empty()) throw ConfigError("empty bandwidth ratio");
  Ratio r;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_u64(text.substr(0, slash), "ratio numerator");
    r.den = parse_u64(text.substr(slash + 1), "ratio denominator");
  } else {
    const auto dot = text.find('.');
    std::string digits(text.substr(0, dot));
    std::size_t decimals = 0;
    if (dot != std::string_view::npos) {
      const auto frac = text.substr(dot + 1);
      digits += frac;
      decimals = frac.size();
    }
    if (decimals > 15) throw ConfigError("bandwidth ratio '" + std::string(text) + "' has too many decimals; use a fraction");
    r.num = parse_u64(digits, "bandwidth ratio");
    r.den = 1;
    for (std::size_t i = 0; i < decimals; ++i) r.den *= 10;
  }
  if (r.den == 0) throw ConfigError("bandwidth ratio has zero denominator");
  if (r.num == 0 || r.num > r.den) throw ConfigError("bandwidth ratio must lie in (0, 1], got " + std::string(text));
  const std::uint64_t g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

std::string Bandwidth::str() const {
  std::string s = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " c=" + std::to_string(c) +
                  " rho=" + rho.str() + " latent=" + std::to_string(latent.h) + "x" + std::to_string(latent.w);
  if (transmitted() != k) s += " transmitted=" + std::to_string(transmitted());
  return s;
}

Bandwidth derive_bandwidth(InputShape input, std::optional<Ratio> rho, std::optional<std::size_t> c) {
  // Latent spatial size does not depend on c; c = 2 always pairs evenly.
  const ArchitectureSpec probe = default_base_architecture(input, 2);
  Bandwidth b;
  b.n = input.source_symbols();
  b.latent = probe.latent;
  const std::size_t area = b.latent.h * b.latent.w;
  if (rho) {
    b.rho = *rho;
    b.k = static_cast<std::size_t>((static_cast<unsigned __int128>(rho->num) * b.n) / rho->den);
    b.c = 2 * b.k / area;
    if (b.c == 0) throw ConfigError("rho=" + rho->str() + " gives k=" + std::to_string(b.k) + ", too small for a " +
                                    std::to_string(b.latent.h) + "x" + std::to_string(b.latent.w) + " latent");
    if (c && *c != b.c) {
      throw ConfigError("inconsistent bandwidth: rho=" + rho->str() + " implies c=" + std::to_string(b.c) +
                        " but c=" + std::to_string(*c) + " was given");
    }
  } else {
    b.c = c.value_or(kReferenceLatentChannels);
    if (b.c == 0) throw ConfigError("c must be positive");
    if ((b.c * area) % 2 != 0) throw ConfigError("c*H*W of the latent must be even");
    b.k = b.c * area / 2;
    const std::uint64_t g = std::gcd<std::uint64_t>(b.k, b.n);
    b.rho = {b.k / g, b.n / g};
  }
  if ((b.c * area) % 2 != 0) throw ConfigError("c*H*W of the latent must be even");
  return b;
}

std::vector<double> parse_snr_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string item(text.substr(pos, end - pos));
    if (item.empty()) throw ConfigError("empty entry in SNR list '" + std::string(text) + "'");
    if (item == "inf") {
      out.push_back(INFINITY);
    } else {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || !std::isfinite(v)) throw ConfigError("invalid SNR value '" + item + "'");
      out.push_back(v);
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("empty SNR list");
  return out;
}

ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  auto number_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "variant") cfg.variant = parse_variant(v.get<std::string>());
      else if (key == "input") cfg.input = parse_input_shape(v.get<std::string>());
      else if (key == "rho") cfg.rho = parse_ratio(number_text(v));
      else if (key == "c") cfg.c = v.get<std::size_t>();
      else if (key == "transmit_power") cfg.transmit_power = v.get<double>();
      else if (key == "lr") cfg.train.learning_rate = v.get<double>();
      else if (key == "batch_size") cfg.train.batch_size = v.get<std::size_t>();
      else if (key == "epochs") cfg.train.epochs = v.get<std::size_t>();
      else if (key == "max_steps") cfg.train.max_steps = v.get<std::size_t>();
      else if (key == "train_snr_db") cfg.train.snr_db = v.get<double>();
      else if (key == "snr_list") {
        if (v.is_string()) {
          cfg.snr_list = parse_snr_list(v.get<std::string>());
        } else {
          cfg.snr_list = v.get<std::vector<double>>();
          if (cfg.snr_list.empty()) throw ConfigError("config: empty snr_list");
        }
      } else if (key == "draws_per_image") cfg.draws_per_image = v.get<std::size_t>();
      else if (key == "crop") cfg.crop = v.get<std::size_t>();
      else if (key == "train_dir") cfg.train_dir = v.get<std::string>();
      else if (key == "test_dir") cfg.test_dir = v.get<std::string>();
      else if (key == "checkpoint") cfg.checkpoint = v.get<std::string>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }
  cfg.train.seed = cfg.seed;
  cfg.bandwidth();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string variants_listing() {
  const ArchitectureSpec base = default_base_architecture(kReferenceInput, kReferenceLatentChannels);
  std::string out;
  for (VariantId id : all_variants()) {
    const ArchitectureSpec a = build_variant(id, base);
    out += std::string(variant_name(id)) + ": enc " + kind_pattern(a.encoder) + "; dec " + kind_pattern(a.decoder) + "\n";
  }
  return out;
}

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> variant;
  std::optional<std::string> input;
  std::optional<std::size_t> c;
  std::optional<std::string> rho;
  std::optional<double> power;
  // analyze
  bool all = false;
  std::optional<std::string> compare;
  std::optional<std::string> csv;
  // train
  std::optional<std::string> train_dir;
  std::optional<double> train_snr;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> crop;
  // eval
  std::optional<std::string> checkpoint;
  std::optional<std::string> test_dir;
  std::optional<std::string> snr_list;
  std::optional<std::size_t> draws;
  // synth
  std::size_t synth_count = 64;
  std::size_t synth_size = 32;
};

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = parse_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.variant) cfg.variant = parse_variant(*f.variant);
  if (f.input) cfg.input = parse_input_shape(*f.input);
  if (f.rho || f.c) {
    // A flag for one side of the (rho, c) pair replaces the file's setting.
    cfg.rho = f.rho ? std::optional<Ratio>(parse_ratio(*f.rho)) : std::nullopt;
    cfg.c = f.c;
  }
  if (f.power) cfg.transmit_power = *f.power;
  if (f.train_dir) cfg.train_dir = *f.train_dir;
  if (f.train_snr) cfg.train.snr_db = *f.train_snr;
  if (f.lr) cfg.train.learning_rate = *f.lr;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.max_steps) cfg.train.max_steps = *f.max_steps;
  if (f.crop) cfg.crop = *f.crop;
  if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
  if (f.test_dir) cfg.test_dir = *f.test_dir;
  if (f.snr_list) cfg.snr_list = parse_snr_list(*f.snr_list);
  if (f.draws) cfg.draws_per_image = *f.draws;
  cfg.train.seed = cfg.seed;
  return cfg;
}

std::filesystem::path checkpoint_path(const ExperimentConfig& cfg) {
  return cfg.checkpoint.empty() ? std::filesystem::path(cfg.out) / "checkpoint.dscj"
                                : std::filesystem::path(cfg.checkpoint);
}

int cmd_analyze(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve(f);
  const Bandwidth bw = cfg.bandwidth();
  out << "# " << cfg.input.str() << " " << bw.str() << "\n";
  std::vector<ComplexityReport> reports;
  if (f.all) {
    for (VariantId id : all_variants()) reports.push_back(model_complexity(id, cfg.input, bw.c));
    out << complexity_summary_text(reports);
  } else {
    reports.push_back(model_complexity(cfg.variant, cfg.input, bw.c));
    out << complexity_layer_text(reports.back());
    if (f.compare) {
      const VariantId other = parse_variant(*f.compare);
      reports.push_back(model_complexity(other, cfg.input, bw.c));
      const Reduction red = reduction_report(reports.front(), reports.back());
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: %s K / %s M\nreduction %s -> %s: params -%.1f%%, flops -%.1f%%\n",
                    reports.back().model.c_str(), reports.back().params_display().c_str(),
                    reports.back().flops_display().c_str(), reports.front().model.c_str(),
                    reports.back().model.c_str(), red.params_percent, red.flops_percent);
      out << buf;
    }
  }
  if (f.csv) write_file(*f.csv, complexity_csv(reports));
  if (f.out) write_file(std::filesystem::path(*f.out) / "complexity.csv", complexity_csv(reports));
  return 0;
}

int cmd_train(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve(f);
  if (cfg.train_dir.empty()) throw ConfigError("train: no dataset path (set --train-dir or train_dir)");
  const Bandwidth bw = cfg.bandwidth();
  out << "# " << cfg.input.str() << " " << bw.str() << "\n";
  const Dataset data = load_dataset(cfg.train_dir, cfg.crop, "train");
  CodecModel model(build_variant(cfg.variant, default_base_architecture(cfg.input, bw.c)),
                   derive_seed(cfg.seed, kInitStream), cfg.transmit_power, cfg.variant);
  out << "training " << variant_name(cfg.variant) << " on " << data.size() << " images, lr=" << cfg.train.learning_rate
      << " batch=" << cfg.train.batch_size << " epochs=" << cfg.train.epochs << " max_steps=" << cfg.train.max_steps
      << " snr=" << cfg.train.snr_db << " dB\n";
  const TrainResult result = train(model, data, cfg.train);
  const std::filesystem::path dir(cfg.out);
  write_file(dir / "loss_history.csv", loss_history_csv(result.history));
  std::filesystem::create_directories(checkpoint_path(cfg).parent_path().empty() ? "." : checkpoint_path(cfg).parent_path());
  save_checkpoint(model, checkpoint_path(cfg));
  if (!result.history.empty()) {
    out << "steps=" << result.history.size() << " initial_loss=" << initial_smoothed_loss(result.history)
        << " final_loss=" << final_smoothed_loss(result.history) << "\n";
  }
  out << "wrote " << (dir / "loss_history.csv").string() << " and " << checkpoint_path(cfg).string() << "\n";
  return 0;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve(f);
  const std::string dir = cfg.test_dir.empty() ? cfg.train_dir : cfg.test_dir;
  if (dir.empty()) throw ConfigError("eval: no dataset path (set --test-dir or test_dir)");
  const CodecModel model = load_checkpoint(checkpoint_path(cfg));
  const Dataset data = load_dataset(dir, cfg.crop, "test");
  const auto sweep = evaluate_sweep(model, data, cfg.snr_list, cfg.draws_per_image, cfg.seed);
  const std::string csv = sweep_csv(sweep);
  write_file(std::filesystem::path(cfg.out) / "sweep.csv", csv);
  out << csv;
  return 0;
}

int cmd_synth(const Flags& f, std::ostream& out) {
  const std::uint64_t seed = f.seed.value_or(0);
  const std::string dir = f.out.value_or(".");
  write_dataset(dir, synthetic_dataset(f.synth_count, f.synth_size, seed));
  out << "wrote " << f.synth_count << " " << f.synth_size << "x" << f.synth_size << " images to " << dir << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depthwise-separable deep JSCC toolkit: variants, complexity, training, SNR sweeps", "dscjscc"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON experiment config; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Master seed (u64)");
  app.add_option("--out", f.out, "Output directory");

  auto add_model_flags = [&f](CLI::App* sub) {
    sub->add_option("--variant", f.variant, "Variant name (see `variants`)");
    sub->add_option("--input", f.input, "Input shape WxHxC, e.g. 256x256x3");
    sub->add_option("--c", f.c, "Latent channel count c");
    sub->add_option("--rho", f.rho, "Bandwidth ratio k/n as a fraction (1/12) or decimal");
    sub->add_option("--power", f.power, "Average transmit power");
  };

  auto* variants = app.add_subcommand("variants", "List every model variant and its layer kinds");

  auto* analyze = app.add_subcommand("analyze", "Parameter and FLOP accounting");
  add_model_flags(analyze);
  analyze->add_flag("--all", f.all, "Report every variant");
  analyze->add_option("--compare", f.compare, "Second variant; prints the reduction relative to --variant");
  analyze->add_option("--csv", f.csv, "Also write the report as CSV to this path");

  auto* train_cmd = app.add_subcommand("train", "Train a codec and write checkpoint + loss history");
  add_model_flags(train_cmd);
  train_cmd->add_option("--train-dir", f.train_dir, "Directory of P6 PPM training images");
  train_cmd->add_option("--snr", f.train_snr, "Training SNR in dB");
  train_cmd->add_option("--lr", f.lr, "Adam learning rate");
  train_cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
  train_cmd->add_option("--epochs", f.epochs, "Epochs");
  train_cmd->add_option("--max-steps", f.max_steps, "Stop after this many steps (0 = no limit)");
  train_cmd->add_option("--crop", f.crop, "Center-crop images to this square size");
  train_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint path (default <out>/checkpoint.dscj)");

  auto* eval_cmd = app.add_subcommand("eval", "PSNR versus SNR sweep for a trained checkpoint");
  eval_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint path (default <out>/checkpoint.dscj)");
  eval_cmd->add_option("--test-dir", f.test_dir, "Directory of P6 PPM test images");
  eval_cmd->add_option("--snr-list", f.snr_list, "Comma-separated SNRs in dB, e.g. 0,5,10,15,19");
  eval_cmd->add_option("--draws", f.draws, "Noise draws per image");
  eval_cmd->add_option("--crop", f.crop, "Center-crop images to this square size");

  auto* synth = app.add_subcommand("synth", "Write a synthetic PPM dataset to --out");
  synth->add_option("--count", f.synth_count, "Number of images");
  synth->add_option("--size", f.synth_size, "Square image size");

  std::vector<std::string> argv_store;
  argv_store.push_back("dscjscc");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (variants->parsed()) {
      out << variants_listing();
      return 0;
    }
    if (analyze->parsed()) return cmd_analyze(f, out);
    if (train_cmd->parsed()) return cmd_train(f, out);
    if (eval_cmd->parsed()) return cmd_eval(f, out);
    if (synth->parsed()) return cmd_synth(f, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dscjscc
