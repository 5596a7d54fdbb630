#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hebbcl/datasets.hpp"
#include "hebbcl/errors.hpp"
#include "hebbcl/network.hpp"

namespace hebbcl {

/// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t* at(std::size_t x, std::size_t y) { return pixels.data() + (y * width + x) * channels; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const { return pixels.data() + (y * width + x) * channels; }
};

using Rgb = std::array<std::uint8_t, 3>;

/// Min-max scales one weight row to [0,255]. Channel-planar rows with 3
/// channels become RGB; a constant row becomes uniform 128.
inline Image weight_to_image(std::span<const float> row, const ImageShape& shape) {
  if (row.size() != shape.size()) {
    throw InvalidArgument("weight_to_image: row has " + std::to_string(row.size()) + " values, shape needs " +
                          std::to_string(shape.size()));
  }
  if (shape.channels != 1 && shape.channels != 3) throw InvalidArgument("weight_to_image: 1 or 3 channels only");
  const auto [lo_it, hi_it] = std::minmax_element(row.begin(), row.end());
  const float lo = *lo_it;
  const float range = *hi_it - lo;
  Image img(shape.width, shape.height, shape.channels);
  const std::size_t plane = shape.height * shape.width;
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      const float v = row[c * plane + p];
      const std::uint8_t out =
          range > 0.0f ? static_cast<std::uint8_t>(std::lround((v - lo) / range * 255.0f)) : std::uint8_t{128};
      img.pixels[p * shape.channels + c] = out;
    }
  }
  return img;
}

enum class Annotate { kNone, kFrozen, kClass };

/// Tab10-like palette used for class borders; ids cycle.
inline Rgb class_color(ClassId c) {
  static constexpr std::array<Rgb, 10> kPalette = {{{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                                                    {148, 103, 189}, {140, 86, 75}, {227, 119, 194},
                                                    {127, 127, 127}, {188, 189, 34}, {23, 190, 207}}};
  return kPalette[static_cast<std::size_t>(c) % kPalette.size()];
}

inline constexpr Rgb kFrozenColor = {255, 0, 0};

/// Pixel size of a grid of `n` tiles. Each cell holds the tile plus a 1-pixel
/// border ring when annotated; cells are separated (and framed) by 1-pixel lines:
/// width = cols*(w + 2b + 1) + 1, height = rows*(h + 2b + 1) + 1.
inline std::pair<std::size_t, std::size_t> grid_size(std::size_t n, const ImageShape& shape, std::size_t cols,
                                                     Annotate annotate) {
  const std::size_t b = annotate == Annotate::kNone ? 0 : 1;
  const std::size_t grid_cols = std::min(cols, std::max<std::size_t>(n, 1));
  const std::size_t grid_rows = (std::max<std::size_t>(n, 1) + grid_cols - 1) / grid_cols;
  return {grid_cols * (shape.width + 2 * b + 1) + 1, grid_rows * (shape.height + 2 * b + 1) + 1};
}

/// All neuron tiles, row-major in neuron order. Frozen annotation draws a red
/// ring around frozen tiles; class annotation colors each ring by class group.
inline Image render_grid(const Network& net, const ImageShape& shape, std::size_t cols,
                         Annotate annotate = Annotate::kNone) {
  if (cols == 0) throw InvalidArgument("render_grid: cols must be >= 1");
  if (shape.size() != net.input_dim()) throw InvalidArgument("render_grid: image shape does not match input_dim");
  const std::size_t b = annotate == Annotate::kNone ? 0 : 1;
  const auto [w, h] = grid_size(net.size(), shape, cols, annotate);
  const std::size_t grid_cols = std::min(cols, net.size());
  Image out(w, h, 3, 0);
  const std::size_t cell_w = shape.width + 2 * b + 1;
  const std::size_t cell_h = shape.height + 2 * b + 1;
  for (std::size_t j = 0; j < net.size(); ++j) {
    const std::size_t x0 = 1 + (j % grid_cols) * cell_w;
    const std::size_t y0 = 1 + (j / grid_cols) * cell_h;
    if (b) {
      std::optional<Rgb> ring;
      if (annotate == Annotate::kFrozen && net.is_frozen(j)) ring = kFrozenColor;
      if (annotate == Annotate::kClass) {
        if (const auto c = net.class_group(j)) ring = class_color(*c);
      }
      if (ring) {
        for (std::size_t y = 0; y < shape.height + 2; ++y) {
          for (std::size_t x = 0; x < shape.width + 2; ++x) {
            if (y != 0 && y != shape.height + 1 && x != 0 && x != shape.width + 1) continue;
            std::copy(ring->begin(), ring->end(), out.at(x0 + x, y0 + y));
          }
        }
      }
    }
    const Image tile = weight_to_image(net.row(j), shape);
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < shape.width; ++x) {
        std::uint8_t* dst = out.at(x0 + b + x, y0 + b + y);
        const std::uint8_t* src = tile.at(x, y);
        for (std::size_t c = 0; c < 3; ++c) dst[c] = src[tile.channels == 3 ? c : 0];
      }
    }
  }
  return out;
}

/// Binary PPM: "P6\n<w> <h>\n255\n" followed by RGB bytes. Gray images are expanded.
inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.width * img.height * 3);
  for (std::size_t p = 0; p < img.width * img.height; ++p) {
    for (std::size_t c = 0; c < 3; ++c) out.push_back(img.pixels[p * img.channels + (img.channels == 3 ? c : 0)]);
  }
  return out;
}

inline void write_ppm(const Image& img, const std::string& path) {
  const auto bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_png(const Image& img, const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG '" + path + "': " + pi.message);
  }
}

}  // namespace hebbcl
