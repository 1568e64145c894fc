#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cage/imaging/raster.hpp"

namespace cage::imaging {

// 5x7 bitmap font covering printable ASCII. Each glyph is 5 column bytes,
// bit 0 is the top row. Characters outside the table render as '?'.
std::array<std::uint8_t, 5> glyph_columns(char32_t c);

// A label plate is a bordered box holding one line of glyphs:
//   border s px, padding 2s px, glyph cells 5s x 7s with an s px gap.
// Width s*(6n+5), height 13s for n characters.
PixelRect label_plate_rect(int x, int y, std::size_t chars, int scale);

// Draws `text` as a label plate with its top-left corner at (x, y) and
// returns the plate rectangle.
PixelRect draw_label_plate(RasterImage& img, int x, int y, std::string_view text, int scale = 2,
                           Rgb ink = kBlack, Rgb paper = kWhite);

struct PlateReading {
  std::string text;
  PixelRect bbox;
};

// Finds every intact label plate in the image and decodes its text. Pixels
// with luma < 128 count as ink. Plates whose cells do not all decode are
// ignored.
std::vector<PlateReading> read_label_plates(const RasterImage& img, int max_scale = 4);

}  // namespace cage::imaging
