#include "changekit/png_io.hpp"

#include "changekit/error.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace changekit {

namespace {

struct ImageGuard {
  png_image* image;
  ~ImageGuard() { png_image_free(image); }
};

png_image make_image() {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  return image;
}

std::vector<std::uint8_t> encode(png_uint_32 width, png_uint_32 height, png_uint_32 format, const std::uint8_t* pixels) {
  png_image image = make_image();
  image.width = width;
  image.height = height;
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr))
    throw IoFailure(std::string("png encode failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr))
    throw IoFailure(std::string("png encode failed: ") + image.message);
  out.resize(size);
  return out;
}

} // namespace

RgbImage RgbImage::filled(std::size_t width, std::size_t height, std::uint32_t rgb) {
  RgbImage img{width, height, std::vector<std::uint8_t>(width * height * 3)};
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) img.set_pixel(x, y, rgb);
  return img;
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  png_image image = make_image();
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeFailure(std::string("png decode failed: ") + image.message);
  ImageGuard guard{&image};
  image.format = PNG_FORMAT_RGB;
  RgbImage out{image.width, image.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr))
    throw DecodeFailure(std::string("png decode failed: ") + image.message);
  return out;
}

ImageSize read_png_size(const std::filesystem::path& path) {
  png_image image = make_image();
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw DecodeFailure("cannot read png header of " + path.string() + ": " + image.message);
  ImageGuard guard{&image};
  return {image.width, image.height};
}

std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image) {
  return encode(static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), PNG_FORMAT_RGB,
                image.data.data());
}

std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height, std::span<const std::uint8_t> values) {
  if (values.size() != width * height) throw IoFailure("gray raster size does not match dimensions");
  return encode(static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), PNG_FORMAT_GRAY, values.data());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("write failed for " + path.string());
}

} // namespace changekit
