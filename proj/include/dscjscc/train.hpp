#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dscjscc/channel.hpp"
#include "dscjscc/dataset.hpp"
#include "dscjscc/model.hpp"

namespace dscjscc {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  // Stop after this many optimizer steps; 0 means run all epochs.
  std::size_t max_steps = 0;
  double snr_db = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  // Mean squared error on [0,1]-normalized pixels (the optimized objective).
  double loss = 0.0;
  // Same batch as a per-image sum of squared errors on the [0,255] scale.
  double sum_sq_per_image = 0.0;
};

struct TrainResult {
  std::vector<LossRecord> history;
};

// Shuffled mini-batches flow through encode -> channel -> decode -> MSE ->
// backward -> Adam. Shuffling and channel noise use separate seeded streams.
// Throws NumericError on a non-finite loss.
TrainResult train(CodecModel& model, const Dataset& data, const TrainConfig& cfg, const ChannelConfig& channel);
// Channel at cfg.snr_db with a noise seed derived from cfg.seed.
TrainResult train(CodecModel& model, const Dataset& data, const TrainConfig& cfg);

// Mean loss over the first (or last) `window` steps.
double initial_smoothed_loss(const std::vector<LossRecord>& history, std::size_t window = 10);
double final_smoothed_loss(const std::vector<LossRecord>& history, std::size_t window = 10);

std::string loss_history_csv(const std::vector<LossRecord>& history);

struct SweepPoint {
  double snr_db = 0.0;
  double mean_psnr_db = 0.0;
  double std_psnr_db = 0.0;
  std::size_t n_images = 0;
  std::size_t n_draws = 0;
};

// Mean PSNR over every image and noise draw at each SNR. An infinite SNR
// evaluates a noise-free channel. Noise streams derive from (seed, SNR index,
// image index).
std::vector<SweepPoint> evaluate_sweep(const CodecModel& model, const Dataset& data, const std::vector<double>& snr_list,
                                       std::size_t draws_per_image, std::uint64_t seed = 0);

// Header: snr_db,mean_psnr_db,std_psnr_db,n_images,n_draws
std::string sweep_csv(const std::vector<SweepPoint>& sweep);

}  // namespace dscjscc
