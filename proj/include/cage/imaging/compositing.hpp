#pragma once

#include <span>
#include <string_view>

#include "cage/imaging/raster.hpp"

namespace cage::imaging {

// Union of the padded boxes, clamped to the image.
RegionMask build_text_mask(std::span<const TextRegion> regions, int width, int height, int padding);

enum class CompositeMode { pixel_copy, feathered };

CompositeMode parse_composite_mode(std::string_view name);
std::string_view to_string(CompositeMode mode);

// Width of the blend band outside the mask in feathered mode.
inline constexpr int kFeatherBand = 2;

// pixel_copy: source where the mask is set, base elsewhere.
// feathered: as pixel_copy inside the mask; pixels within kFeatherBand
// (chessboard distance) outside it blend linearly from source towards base.
RasterImage composite_regions(const RasterImage& base, const RasterImage& source, const RegionMask& mask,
                              CompositeMode mode = CompositeMode::pixel_copy);

// Copy of `img` with edge pixels painted in `ink`.
RasterImage overlay_edges(const RasterImage& img, const EdgeMap& edges, Rgb ink = kBlack);

// Fraction of `reference` edge pixels also set in `candidate`; 1 when the
// reference has no edges.
double edge_overlap(const EdgeMap& reference, const EdgeMap& candidate);

// True iff the two images are byte-equal on every masked pixel.
bool masked_equal(const RasterImage& a, const RasterImage& b, const RegionMask& mask);

}  // namespace cage::imaging
