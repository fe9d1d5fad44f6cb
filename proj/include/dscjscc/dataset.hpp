#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dscjscc/tensor.hpp"

namespace dscjscc {

// 8-bit RGB, interleaved, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  friend bool operator==(const Image&, const Image&) = default;
};

// Binary PPM ("P6", maxval 255).
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

struct CropOffset {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const CropOffset&, const CropOffset&) = default;
};

// floor((dim - target) / 2) per axis.
CropOffset center_crop_offset(std::size_t width, std::size_t height, std::size_t target);
Image center_crop(const Image& image, std::size_t target);

struct Dataset {
  std::vector<Image> images;
  std::vector<std::string> names;
  std::string split = "train";

  std::size_t size() const { return images.size(); }
  // (N,3,H,W) tensor of pixel values in [0,255].
  Tensor4 batch(std::span<const std::size_t> indices) const;
  Tensor4 all() const;
};

// Loads every *.ppm in `dir` in lexicographic filename order. With
// `crop_size`, larger images are center-cropped to crop_size x crop_size.
// All problems are collected and reported together, one line per file.
Dataset load_dataset(const std::filesystem::path& dir, std::optional<std::size_t> crop_size = std::nullopt,
                     std::string split = "train");

// Smooth colour gradients plus mild noise; deterministic in `seed`.
Dataset synthetic_dataset(std::size_t count, std::size_t size, std::uint64_t seed);
void write_dataset(const std::filesystem::path& dir, const Dataset& data);

}  // namespace dscjscc
