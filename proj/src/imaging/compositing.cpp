#include "cage/imaging/compositing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cage/error.hpp"

namespace cage::imaging {

RegionMask build_text_mask(std::span<const TextRegion> regions, int width, int height, int padding) {
  RegionMask mask(width, height);
  for (const auto& r : regions) {
    const int x0 = std::max(0, r.bbox.x - padding);
    const int y0 = std::max(0, r.bbox.y - padding);
    const int x1 = std::min(width, r.bbox.x + r.bbox.width + padding);
    const int y1 = std::min(height, r.bbox.y + r.bbox.height + padding);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) mask.set(x, y);
    }
  }
  return mask;
}

CompositeMode parse_composite_mode(std::string_view name) {
  if (name == "pixel-copy") return CompositeMode::pixel_copy;
  if (name == "feathered") return CompositeMode::feathered;
  throw ValidationError("unknown composite mode: " + std::string(name));
}

std::string_view to_string(CompositeMode mode) {
  return mode == CompositeMode::pixel_copy ? "pixel-copy" : "feathered";
}

RasterImage composite_regions(const RasterImage& base, const RasterImage& source, const RegionMask& mask,
                              CompositeMode mode) {
  if (base.width() != source.width() || base.height() != source.height() || base.width() != mask.width() ||
      base.height() != mask.height()) {
    throw DimensionError("composite dimension mismatch: base " + std::to_string(base.width()) + "x" +
                         std::to_string(base.height()) + ", source " + std::to_string(source.width()) + "x" +
                         std::to_string(source.height()) + ", mask " + std::to_string(mask.width()) + "x" +
                         std::to_string(mask.height()));
  }
  RasterImage out = base;
  const int w = base.width();
  const int h = base.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) {
        out.set(x, y, source.at(x, y));
        continue;
      }
      if (mode != CompositeMode::feathered) continue;
      int d = kFeatherBand + 1;
      for (int dy = -kFeatherBand; dy <= kFeatherBand; ++dy) {
        for (int dx = -kFeatherBand; dx <= kFeatherBand; ++dx) {
          if (mask.contains(x + dx, y + dy) && mask.at(x + dx, y + dy)) {
            d = std::min(d, std::max(std::abs(dx), std::abs(dy)));
          }
        }
      }
      if (d > kFeatherBand) continue;
      const double a = 1.0 - static_cast<double>(d) / (kFeatherBand + 1);
      const Rgb s = source.at(x, y);
      const Rgb b = base.at(x, y);
      auto mix = [a](std::uint8_t sv, std::uint8_t bv) {
        return static_cast<std::uint8_t>(std::lround(a * sv + (1.0 - a) * bv));
      };
      out.set(x, y, {mix(s.r, b.r), mix(s.g, b.g), mix(s.b, b.b)});
    }
  }
  return out;
}

RasterImage overlay_edges(const RasterImage& img, const EdgeMap& edges, Rgb ink) {
  if (img.width() != edges.width() || img.height() != edges.height()) {
    throw DimensionError("edge map does not match image dimensions");
  }
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (edges.at(x, y)) out.set(x, y, ink);
    }
  }
  return out;
}

double edge_overlap(const EdgeMap& reference, const EdgeMap& candidate) {
  if (reference.width() != candidate.width() || reference.height() != candidate.height()) {
    throw DimensionError("edge maps differ in size");
  }
  std::size_t total = 0;
  std::size_t kept = 0;
  for (int y = 0; y < reference.height(); ++y) {
    for (int x = 0; x < reference.width(); ++x) {
      if (!reference.at(x, y)) continue;
      ++total;
      kept += candidate.at(x, y) ? 1 : 0;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(total);
}

bool masked_equal(const RasterImage& a, const RasterImage& b, const RegionMask& mask) {
  if (a.width() != b.width() || a.height() != b.height() || a.width() != mask.width() ||
      a.height() != mask.height()) {
    return false;
  }
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (mask.at(x, y) && !(a.at(x, y) == b.at(x, y))) return false;
    }
  }
  return true;
}

}  // namespace cage::imaging
