#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cage/imaging/raster.hpp"

namespace cage::imaging {

// Any PNG colour type decodes to RGB; alpha is composited over white.
RasterImage decode_png(std::span<const std::uint8_t> bytes);
RasterImage read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
void write_png(const std::filesystem::path& path, const RasterImage& img);

// Binary maps are stored as 1-channel PNG with values 0/255.
template <typename Tag>
std::vector<std::uint8_t> encode_binary_png(const BinaryMap<Tag>& map);
template <typename Tag>
void write_binary_png(const std::filesystem::path& path, const BinaryMap<Tag>& map);
// Pixels >= 128 read as set.
template <typename Tag>
BinaryMap<Tag> decode_binary_png(std::span<const std::uint8_t> bytes);

}  // namespace cage::imaging
