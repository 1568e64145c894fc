#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cage::imaging {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

// 8-bit RGB, row-major, 3 bytes per pixel.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = kWhite);
  RasterImage(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0; }

  Rgb at(int x, int y) const {
    const auto i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const auto i = index(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  void fill_rect(int x, int y, int w, int h, Rgb c);

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Single-channel floating point raster used by the edge pipeline.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  // Clamp-to-edge replication outside the image.
  double clamped(int x, int y) const;

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Binary per-pixel map. The tag keeps edge maps and masks from being mixed up.
template <typename Tag>
class BinaryMap {
 public:
  BinaryMap() = default;
  BinaryMap(int width, int height, bool fill = false)
      : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct EdgeTag {};
struct MaskTag {};
using EdgeMap = BinaryMap<EdgeTag>;
using RegionMask = BinaryMap<MaskTag>;

// Integer pixel rectangle, half-open: [x, x+width) x [y, y+height).
struct PixelRect {
  int x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct TextRegion {
  std::string text;
  PixelRect bbox;
  friend bool operator==(const TextRegion&, const TextRegion&) = default;
};

// Luma 0.299/0.587/0.114 on the 0..255 scale.
GrayImage to_grayscale(const RasterImage& img);

}  // namespace cage::imaging
