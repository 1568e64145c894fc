#include "cage/imaging/raster.hpp"

#include <algorithm>

#include "cage/error.hpp"

namespace cage::imaging {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw DimensionError("raster dimensions must be positive");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
  if (width < 1 || height < 1) throw DimensionError("raster dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw DimensionError("raster data length does not match width*height*3");
  }
}

void RasterImage::fill_rect(int x, int y, int w, int h, Rgb c) {
  const int x0 = std::max(0, x);
  const int y0 = std::max(0, y);
  const int x1 = std::min(width_, x + w);
  const int y1 = std::min(height_, y + h);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) set(xx, yy, c);
  }
}

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 1 || height < 1) throw DimensionError("raster dimensions must be positive");
}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

GrayImage to_grayscale(const RasterImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      out.at(x, y) = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
  }
  return out;
}

}  // namespace cage::imaging
