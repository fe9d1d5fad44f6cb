#include "dscjscc/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "dscjscc/metrics.hpp"
#include "dscjscc/optim.hpp"

namespace dscjscc {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kTrainNoiseStream = 0x4e4f495345ULL;
constexpr std::uint64_t kEvalNoiseStream = 0x4556414cULL;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("train: learning rate must be non-negative");
  if (batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (epochs == 0) throw ConfigError("train: epochs must be positive");
}

TrainResult train(CodecModel& model, const Dataset& data, const TrainConfig& cfg, const ChannelConfig& channel_cfg) {
  cfg.validate();
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  const auto& in = model.architecture().input;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Image& img = data.images[i];
    if (img.width != in.width || img.height != in.height || in.channels != 3) {
      throw ShapeError("train: image " + std::to_string(i) + " is " + std::to_string(img.width) + "x" +
                       std::to_string(img.height) + "x3, model expects " + in.str());
    }
  }

  Rng shuffle(derive_seed(cfg.seed, kShuffleStream));
  Channel channel(channel_cfg);
  AdamState adam;
  TrainResult result;
  std::vector<std::size_t> order(data.size());
  const double pixels = static_cast<double>(in.source_symbols());

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      if (cfg.max_steps != 0 && step >= cfg.max_steps) return result;
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Tensor4 target = normalize_pixels(data.batch(idx));

      Tape tape;
      const auto params = model.bind(tape);
      const VarId x = tape.constant(target);
      const VarId z = model.encoder_graph(tape, params, x);
      const VarId received = channel.awgn(tape, z);
      const VarId recon = model.decoder_graph(tape, params, received);
      const VarId loss = tape.mse(recon, x);
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw NumericError("train: non-finite loss at step " + std::to_string(step) + " (epoch " +
                           std::to_string(epoch) + ", batch starting at sample " + std::to_string(order[start]) + ")");
      }
      GradRecord grads = tape.backward(loss);

      std::vector<Tensor4*> targets;
      std::vector<Tensor4> grad_values;
      std::vector<const Tensor4*> grad_ptrs;
      grad_values.reserve(params.size());
      for (std::size_t p = 0; p < params.size(); ++p) {
        targets.push_back(&model.parameters()[p].value);
        grad_values.push_back(grads.take(params[p]));
      }
      for (const auto& g : grad_values) grad_ptrs.push_back(&g);
      adam_step(std::move(targets), grad_ptrs, adam, cfg.learning_rate);

      result.history.push_back({step, epoch, loss_value, loss_value * 255.0 * 255.0 * pixels});
      ++step;
    }
  }
  return result;
}

TrainResult train(CodecModel& model, const Dataset& data, const TrainConfig& cfg) {
  return train(model, data, cfg,
               ChannelConfig::from_snr(cfg.snr_db, derive_seed(cfg.seed, kTrainNoiseStream), model.transmit_power()));
}

double initial_smoothed_loss(const std::vector<LossRecord>& history, std::size_t window) {
  if (history.empty()) throw Error("initial_smoothed_loss: empty history");
  const std::size_t n = std::min(window, history.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += history[i].loss;
  return acc / static_cast<double>(n);
}

double final_smoothed_loss(const std::vector<LossRecord>& history, std::size_t window) {
  if (history.empty()) throw Error("final_smoothed_loss: empty history");
  const std::size_t n = std::min(window, history.size());
  double acc = 0.0;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) acc += history[i].loss;
  return acc / static_cast<double>(n);
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
  std::string out = "step,epoch,loss,sum_sq_per_image\n";
  for (const auto& r : history) {
    out += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + format_double(r.loss) + "," +
           format_double(r.sum_sq_per_image) + "\n";
  }
  return out;
}

std::vector<SweepPoint> evaluate_sweep(const CodecModel& model, const Dataset& data, const std::vector<double>& snr_list,
                                       std::size_t draws_per_image, std::uint64_t seed) {
  if (snr_list.empty()) throw ConfigError("evaluate_sweep: empty SNR list");
  if (draws_per_image == 0) throw ConfigError("evaluate_sweep: draws_per_image must be positive");
  if (data.size() == 0) throw ConfigError("evaluate_sweep: empty dataset");

  const Tensor4 images = data.all();
  const auto symbols = model.encode(images);
  const std::size_t item = images.shape().c * images.shape().h * images.shape().w;

  std::vector<SweepPoint> out;
  for (std::size_t s = 0; s < snr_list.size(); ++s) {
    const double snr = snr_list[s];
    std::vector<double> scores;
    scores.reserve(data.size() * draws_per_image);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::uint64_t noise_seed = derive_seed(seed, kEvalNoiseStream + s, i);
      Channel channel(std::isinf(snr) && snr > 0 ? ChannelConfig::noise_free(noise_seed, model.transmit_power())
                                                 : ChannelConfig::from_snr(snr, noise_seed, model.transmit_power()));
      std::vector<ComplexVector> received;
      for (std::size_t d = 0; d < draws_per_image; ++d) received.push_back(channel.awgn(symbols[i]));
      const Tensor4 recon = model.decode(received);
      const auto ref = images.item(i);
      for (std::size_t d = 0; d < draws_per_image; ++d) {
        const auto rec = recon.item(d);
        double acc = 0.0;
        for (std::size_t p = 0; p < item; ++p) {
          const double diff = ref[p] - rec[p];
          acc += diff * diff;
        }
        scores.push_back(psnr_from_mse(acc / static_cast<double>(item)));
      }
    }
    double mean = 0.0;
    for (double v : scores) mean += v;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double v : scores) var += (v - mean) * (v - mean);
    const double std = scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
    out.push_back({snr, mean, std, data.size(), draws_per_image});
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& sweep) {
  std::string out = "snr_db,mean_psnr_db,std_psnr_db,n_images,n_draws\n";
  for (const auto& p : sweep) {
    out += format_double(p.snr_db) + "," + format_double(p.mean_psnr_db) + "," + format_double(p.std_psnr_db) + "," +
           std::to_string(p.n_images) + "," + std::to_string(p.n_draws) + "\n";
  }
  return out;
}

}  // namespace dscjscc
