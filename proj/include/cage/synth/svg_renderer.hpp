#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cage/imaging/raster.hpp"
#include "cage/synth/types.hpp"

namespace cage::synth {

struct SvgRender {
  imaging::RasterImage image;
  std::vector<imaging::TextRegion> regions;
  std::optional<StructureGraph> structure;
};

// Rasterizes a small SVG subset: <svg width height>, <g>, <rect>, <line>,
// <circle>, <text x y font-size fill> and <metadata id="structure">{json}</metadata>.
// Text is drawn as label plates (see glyph_font.hpp) with (x, y) as the
// plate's top-left corner; font-size / 8 gives the plate scale. Each text
// element's plate is reported as an authoritative region.
// Throws ParseError on malformed XML or attributes, ValidationError when
// width*height exceeds `max_pixels`.
SvgRender render_svg(std::string_view source, long long max_pixels = 16'777'216);

}  // namespace cage::synth
