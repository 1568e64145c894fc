#include "cage/imaging/png_io.hpp"

#include <png.h>

#include <cstring>

#include "cage/codec.hpp"
#include "cage/error.hpp"

namespace cage::imaging {

namespace {

std::vector<std::uint8_t> decode_to(std::span<const std::uint8_t> bytes, png_uint_32 format, int& w, int& h) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ParseError(std::string("PNG decode failed: ") + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&image, &white, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("PNG decode failed: " + msg);
  }
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  return pixels;
}

std::vector<std::uint8_t> encode_from(const std::uint8_t* pixels, int w, int h, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  auto pixels = decode_to(bytes, PNG_FORMAT_RGB, w, h);
  return RasterImage(w, h, std::move(pixels));
}

RasterImage read_png(const std::filesystem::path& path) {
  const auto bytes = codec::read_file(path.string());
  try {
    return decode_png(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  return encode_from(img.bytes().data(), img.width(), img.height(), PNG_FORMAT_RGB);
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  codec::write_file(path.string(), encode_png(img));
}

template <typename Tag>
std::vector<std::uint8_t> encode_binary_png(const BinaryMap<Tag>& map) {
  std::vector<std::uint8_t> gray(map.bits().size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = map.bits()[i] ? 255 : 0;
  return encode_from(gray.data(), map.width(), map.height(), PNG_FORMAT_GRAY);
}

template <typename Tag>
void write_binary_png(const std::filesystem::path& path, const BinaryMap<Tag>& map) {
  codec::write_file(path.string(), encode_binary_png(map));
}

template <typename Tag>
BinaryMap<Tag> decode_binary_png(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  auto gray = decode_to(bytes, PNG_FORMAT_GRAY, w, h);
  BinaryMap<Tag> map(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) map.set(x, y, gray[static_cast<std::size_t>(y) * w + x] >= 128);
  }
  return map;
}

template std::vector<std::uint8_t> encode_binary_png(const EdgeMap&);
template std::vector<std::uint8_t> encode_binary_png(const RegionMask&);
template void write_binary_png(const std::filesystem::path&, const EdgeMap&);
template void write_binary_png(const std::filesystem::path&, const RegionMask&);
template EdgeMap decode_binary_png<EdgeTag>(std::span<const std::uint8_t>);
template RegionMask decode_binary_png<MaskTag>(std::span<const std::uint8_t>);

}  // namespace cage::imaging
