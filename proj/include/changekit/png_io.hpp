#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace changekit {

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  std::uint32_t pixel(std::size_t x, std::size_t y) const {
    const auto* p = &data[(y * width + x) * 3];
    return (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | std::uint32_t{p[2]};
  }
  void set_pixel(std::size_t x, std::size_t y, std::uint32_t rgb) {
    auto* p = &data[(y * width + x) * 3];
    p[0] = static_cast<std::uint8_t>(rgb >> 16);
    p[1] = static_cast<std::uint8_t>(rgb >> 8);
    p[2] = static_cast<std::uint8_t>(rgb);
  }
  static RgbImage filled(std::size_t width, std::size_t height, std::uint32_t rgb);
};

struct ImageSize {
  std::size_t width = 0;
  std::size_t height = 0;
  bool operator==(const ImageSize&) const = default;
};

/// Decodes any PNG (gray, palette, RGB, with or without alpha) to RGB8.
/// Gray values v come out as (v, v, v). Throws DecodeFailure.
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);

/// Reads only the header. Throws DecodeFailure / IoFailure.
ImageSize read_png_size(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image);
std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height, std::span<const std::uint8_t> values);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace changekit
