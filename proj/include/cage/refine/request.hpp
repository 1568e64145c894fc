#pragma once

#include <string>
#include <vector>

#include "cage/imaging/canny.hpp"
#include "cage/imaging/compositing.hpp"
#include "cage/imaging/raster.hpp"
#include "cage/refine/style.hpp"
#include "cage/synth/types.hpp"

namespace cage::refine {

struct RefineConfig {
  imaging::CannyParams canny;
  int mask_padding = 2;
  imaging::CompositeMode composite = imaging::CompositeMode::pixel_copy;
};

struct RefinementRequest {
  imaging::EdgeMap edge_map;
  imaging::RegionMask preservation_mask;
  StyleSpec style;
  int width = 0;
  int height = 0;
  // The programmatic rendering, for image-to-image backends.
  imaging::RasterImage init_image;
  std::vector<std::string> warnings;
};

RefinementRequest build_refinement_request(const synth::RenderOutput& prog, const StyleSpec& style,
                                           const RefineConfig& cfg = {});

}  // namespace cage::refine
