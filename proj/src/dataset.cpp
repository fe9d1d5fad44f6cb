#include "dscjscc/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dscjscc/error.hpp"
#include "dscjscc/rng.hpp"

namespace dscjscc {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t header_number(std::istream& in, const std::string& what, const std::filesystem::path& path) {
  const std::string tok = header_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw FormatError(path.string() + ": bad PPM " + what + " '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  if (header_token(in) != "P6") throw FormatError(path.string() + ": not a binary PPM (P6)");
  Image img;
  img.width = header_number(in, "width", path);
  img.height = header_number(in, "height", path);
  const std::size_t maxval = header_number(in, "maxval", path);
  if (img.width == 0 || img.height == 0) throw FormatError(path.string() + ": empty image");
  if (maxval != 255) throw FormatError(path.string() + ": unsupported maxval " + std::to_string(maxval));
  img.rgb.resize(img.width * img.height * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

CropOffset center_crop_offset(std::size_t width, std::size_t height, std::size_t target) {
  if (width < target || height < target) {
    throw ShapeError("center_crop: " + std::to_string(width) + "x" + std::to_string(height) + " image smaller than " +
                     std::to_string(target));
  }
  return {(width - target) / 2, (height - target) / 2};
}

Image center_crop(const Image& image, std::size_t target) {
  const CropOffset off = center_crop_offset(image.width, image.height, target);
  Image out{target, target, std::vector<std::uint8_t>(target * target * 3)};
  for (std::size_t y = 0; y < target; ++y) {
    const auto* src = image.rgb.data() + ((y + off.y) * image.width + off.x) * 3;
    std::copy(src, src + target * 3, out.rgb.data() + y * target * 3);
  }
  return out;
}

Tensor4 Dataset::batch(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ShapeError("Dataset::batch: empty index list");
  const Image& first = images.at(indices[0]);
  Tensor4 out({indices.size(), 3, first.height, first.width});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Image& img = images.at(indices[b]);
    if (img.width != first.width || img.height != first.height) {
      throw ShapeError("Dataset::batch", "image width", first.width, img.width);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      auto plane = out.plane(b, c);
      for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = img.rgb[i * 3 + c];
    }
  }
  return out;
}

Tensor4 Dataset::all() const {
  std::vector<std::size_t> idx(images.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return batch(idx);
}

Dataset load_dataset(const std::filesystem::path& dir, std::optional<std::size_t> crop_size, std::string split) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw FormatError("dataset: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ppm") files.push_back(entry.path());
  }
  if (files.empty()) throw FormatError("dataset: no .ppm images in '" + dir.string() + "'");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  Dataset data;
  data.split = std::move(split);
  std::vector<std::string> problems;
  for (const auto& f : files) {
    try {
      Image img = read_ppm(f);
      if (crop_size) img = center_crop(img, *crop_size);
      if (!data.images.empty() &&
          (img.width != data.images[0].width || img.height != data.images[0].height)) {
        throw ShapeError(f.string() + ": size " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                         " differs from " + std::to_string(data.images[0].width) + "x" +
                         std::to_string(data.images[0].height));
      }
      data.images.push_back(std::move(img));
      data.names.push_back(f.filename().string());
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "dataset: " + std::to_string(problems.size()) + " unreadable or incompatible file(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw FormatError(msg);
  }
  return data;
}

Dataset synthetic_dataset(std::size_t count, std::size_t size, std::uint64_t seed) {
  if (count == 0 || size == 0) throw ConfigError("synthetic_dataset: count and size must be positive");
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < count; ++i) {
    Image img{size, size, std::vector<std::uint8_t>(size * size * 3)};
    std::array<double, 3> base{}, gx{}, gy{}, amp{};
    for (std::size_t c = 0; c < 3; ++c) {
      base[c] = rng.uniform(40.0, 215.0);
      gx[c] = rng.uniform(-80.0, 80.0);
      gy[c] = rng.uniform(-80.0, 80.0);
      amp[c] = rng.uniform(0.0, 30.0);
    }
    const double freq = rng.uniform(0.5, 2.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double u = static_cast<double>(x) / static_cast<double>(size) - 0.5;
        const double v = static_cast<double>(y) / static_cast<double>(size) - 0.5;
        const double wave = std::sin(2.0 * std::numbers::pi * freq * (u + v) + phase);
        for (std::size_t c = 0; c < 3; ++c) {
          const double val = base[c] + gx[c] * u + gy[c] * v + amp[c] * wave + rng.uniform(-6.0, 6.0);
          img.rgb[(y * size + x) * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::round(val), 0.0, 255.0));
        }
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "synth_%05zu.ppm", i);
    data.images.push_back(std::move(img));
    data.names.emplace_back(name);
  }
  return data;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < data.size(); ++i) write_ppm(dir / data.names.at(i), data.images[i]);
}

}  // namespace dscjscc
