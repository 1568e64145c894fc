#include "cage/imaging/glyph_font.hpp"

#include <map>
#include <optional>

#include "cage/text.hpp"

namespace cage::imaging {

namespace {

constexpr std::uint8_t kFont[95][5] = {
    {0x00, 0x00, 0x00, 0x00, 0x00},  // ' '
    {0x00, 0x00, 0x5F, 0x00, 0x00},  // !
    {0x00, 0x07, 0x00, 0x07, 0x00},  // "
    {0x14, 0x7F, 0x14, 0x7F, 0x14},  // #
    {0x24, 0x2A, 0x7F, 0x2A, 0x12},  // $
    {0x23, 0x13, 0x08, 0x64, 0x62},  // %
    {0x36, 0x49, 0x56, 0x20, 0x50},  // &
    {0x00, 0x05, 0x03, 0x00, 0x00},  // '
    {0x00, 0x1C, 0x22, 0x41, 0x00},  // (
    {0x00, 0x41, 0x22, 0x1C, 0x00},  // )
    {0x2A, 0x1C, 0x7F, 0x1C, 0x2A},  // *
    {0x08, 0x08, 0x3E, 0x08, 0x08},  // +
    {0x00, 0x50, 0x30, 0x00, 0x00},  // ,
    {0x08, 0x08, 0x08, 0x08, 0x08},  // -
    {0x00, 0x60, 0x60, 0x00, 0x00},  // .
    {0x20, 0x10, 0x08, 0x04, 0x02},  // /
    {0x3E, 0x51, 0x49, 0x45, 0x3E},  // 0
    {0x00, 0x42, 0x7F, 0x40, 0x00},  // 1
    {0x42, 0x61, 0x51, 0x49, 0x46},  // 2
    {0x21, 0x41, 0x45, 0x4B, 0x31},  // 3
    {0x18, 0x14, 0x12, 0x7F, 0x10},  // 4
    {0x27, 0x45, 0x45, 0x45, 0x39},  // 5
    {0x3C, 0x4A, 0x49, 0x49, 0x30},  // 6
    {0x01, 0x71, 0x09, 0x05, 0x03},  // 7
    {0x36, 0x49, 0x49, 0x49, 0x36},  // 8
    {0x06, 0x49, 0x49, 0x29, 0x1E},  // 9
    {0x00, 0x36, 0x36, 0x00, 0x00},  // :
    {0x00, 0x56, 0x36, 0x00, 0x00},  // ;
    {0x08, 0x14, 0x22, 0x41, 0x00},  // <
    {0x14, 0x14, 0x14, 0x14, 0x14},  // =
    {0x00, 0x41, 0x22, 0x14, 0x08},  // >
    {0x02, 0x01, 0x51, 0x09, 0x06},  // ?
    {0x32, 0x49, 0x79, 0x41, 0x3E},  // @
    {0x7E, 0x11, 0x11, 0x11, 0x7E},  // A
    {0x7F, 0x49, 0x49, 0x49, 0x36},  // B
    {0x3E, 0x41, 0x41, 0x41, 0x22},  // C
    {0x7F, 0x41, 0x41, 0x22, 0x1C},  // D
    {0x7F, 0x49, 0x49, 0x49, 0x41},  // E
    {0x7F, 0x09, 0x09, 0x09, 0x01},  // F
    {0x3E, 0x41, 0x49, 0x49, 0x7A},  // G
    {0x7F, 0x08, 0x08, 0x08, 0x7F},  // H
    {0x00, 0x41, 0x7F, 0x41, 0x00},  // I
    {0x20, 0x40, 0x41, 0x3F, 0x01},  // J
    {0x7F, 0x08, 0x14, 0x22, 0x41},  // K
    {0x7F, 0x40, 0x40, 0x40, 0x40},  // L
    {0x7F, 0x02, 0x0C, 0x02, 0x7F},  // M
    {0x7F, 0x04, 0x08, 0x10, 0x7F},  // N
    {0x3E, 0x41, 0x41, 0x41, 0x3E},  // O
    {0x7F, 0x09, 0x09, 0x09, 0x06},  // P
    {0x3E, 0x41, 0x51, 0x21, 0x5E},  // Q
    {0x7F, 0x09, 0x19, 0x29, 0x46},  // R
    {0x46, 0x49, 0x49, 0x49, 0x31},  // S
    {0x01, 0x01, 0x7F, 0x01, 0x01},  // T
    {0x3F, 0x40, 0x40, 0x40, 0x3F},  // U
    {0x1F, 0x20, 0x40, 0x20, 0x1F},  // V
    {0x3F, 0x40, 0x38, 0x40, 0x3F},  // W
    {0x63, 0x14, 0x08, 0x14, 0x63},  // X
    {0x07, 0x08, 0x70, 0x08, 0x07},  // Y
    {0x61, 0x51, 0x49, 0x45, 0x43},  // Z
    {0x00, 0x7F, 0x41, 0x41, 0x00},  // [
    {0x02, 0x04, 0x08, 0x10, 0x20},  // backslash
    {0x00, 0x41, 0x41, 0x7F, 0x00},  // ]
    {0x04, 0x02, 0x01, 0x02, 0x04},  // ^
    {0x40, 0x40, 0x40, 0x40, 0x40},  // _
    {0x00, 0x01, 0x02, 0x04, 0x00},  // `
    {0x20, 0x54, 0x54, 0x54, 0x78},  // a
    {0x7F, 0x48, 0x44, 0x44, 0x38},  // b
    {0x38, 0x44, 0x44, 0x44, 0x20},  // c
    {0x38, 0x44, 0x44, 0x48, 0x7F},  // d
    {0x38, 0x54, 0x54, 0x54, 0x18},  // e
    {0x08, 0x7E, 0x09, 0x01, 0x02},  // f
    {0x0C, 0x52, 0x52, 0x52, 0x3E},  // g
    {0x7F, 0x08, 0x04, 0x04, 0x78},  // h
    {0x00, 0x44, 0x7D, 0x40, 0x00},  // i
    {0x20, 0x40, 0x44, 0x3D, 0x00},  // j
    {0x7F, 0x10, 0x28, 0x44, 0x00},  // k
    {0x00, 0x41, 0x7F, 0x40, 0x00},  // l
    {0x7C, 0x04, 0x18, 0x04, 0x78},  // m
    {0x7C, 0x08, 0x04, 0x04, 0x78},  // n
    {0x38, 0x44, 0x44, 0x44, 0x38},  // o
    {0x7C, 0x14, 0x14, 0x14, 0x08},  // p
    {0x08, 0x14, 0x14, 0x18, 0x7C},  // q
    {0x7C, 0x08, 0x04, 0x04, 0x08},  // r
    {0x48, 0x54, 0x54, 0x54, 0x20},  // s
    {0x04, 0x3F, 0x44, 0x40, 0x20},  // t
    {0x3C, 0x40, 0x40, 0x20, 0x7C},  // u
    {0x1C, 0x20, 0x40, 0x20, 0x1C},  // v
    {0x3C, 0x40, 0x30, 0x40, 0x3C},  // w
    {0x44, 0x28, 0x10, 0x28, 0x44},  // x
    {0x0C, 0x50, 0x50, 0x50, 0x3C},  // y
    {0x44, 0x64, 0x54, 0x4C, 0x44},  // z
    {0x00, 0x08, 0x36, 0x41, 0x00},  // {
    {0x00, 0x00, 0x7F, 0x00, 0x00},  // |
    {0x00, 0x41, 0x36, 0x08, 0x00},  // }
    {0x10, 0x08, 0x08, 0x10, 0x08},  // ~
};

std::uint64_t pack(const std::array<std::uint8_t, 5>& cols) {
  std::uint64_t k = 0;
  for (auto c : cols) k = (k << 8) | c;
  return k;
}

const std::map<std::uint64_t, char>& reverse_table() {
  static const std::map<std::uint64_t, char> table = [] {
    std::map<std::uint64_t, char> t;
    for (int i = 0; i < 95; ++i) {
      std::array<std::uint8_t, 5> cols{};
      for (int j = 0; j < 5; ++j) cols[j] = kFont[i][j];
      t.emplace(pack(cols), static_cast<char>(32 + i));
    }
    return t;
  }();
  return table;
}

bool ink(const RasterImage& img, int x, int y) {
  const Rgb c = img.at(x, y);
  return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b < 128.0;
}

bool all_ink(const RasterImage& img, int x, int y, int w, int h, bool want) {
  for (int yy = y; yy < y + h; ++yy) {
    for (int xx = x; xx < x + w; ++xx) {
      if (ink(img, xx, yy) != want) return false;
    }
  }
  return true;
}

// Validates and decodes a plate of n characters at scale s; empty on failure.
std::optional<std::string> decode_plate(const RasterImage& img, int x0, int y0, int s, int n) {
  const PixelRect r = label_plate_rect(x0, y0, static_cast<std::size_t>(n), s);
  if (r.x + r.width > img.width() || r.y + r.height > img.height()) return std::nullopt;
  // Border ring.
  if (!all_ink(img, r.x, r.y, r.width, s, true) || !all_ink(img, r.x, r.y + r.height - s, r.width, s, true) ||
      !all_ink(img, r.x, r.y, s, r.height, true) || !all_ink(img, r.x + r.width - s, r.y, s, r.height, true)) {
    return std::nullopt;
  }
  // Padding ring.
  const int ix = r.x + s, iy = r.y + s, iw = r.width - 2 * s, ih = r.height - 2 * s;
  if (!all_ink(img, ix, iy, iw, 2 * s, false) || !all_ink(img, ix, iy + ih - 2 * s, iw, 2 * s, false) ||
      !all_ink(img, ix, iy, 2 * s, ih, false) || !all_ink(img, ix + iw - 2 * s, iy, 2 * s, ih, false)) {
    return std::nullopt;
  }
  const auto& table = reverse_table();
  std::string text;
  for (int i = 0; i < n; ++i) {
    const int cx = r.x + 3 * s + 6 * s * i;
    const int cy = r.y + 3 * s;
    if (i + 1 < n && !all_ink(img, cx + 5 * s, cy, s, 7 * s, false)) return std::nullopt;
    std::array<std::uint8_t, 5> cols{};
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        const int bx = cx + col * s;
        const int by = cy + row * s;
        const bool on = ink(img, bx, by);
        if (!all_ink(img, bx, by, s, s, on)) return std::nullopt;
        if (on) cols[col] |= static_cast<std::uint8_t>(1u << row);
      }
    }
    auto it = table.find(pack(cols));
    if (it == table.end()) return std::nullopt;
    text.push_back(it->second);
  }
  std::string trimmed = text::trim(text);
  if (trimmed.empty()) return std::nullopt;
  return trimmed;
}

}  // namespace

std::array<std::uint8_t, 5> glyph_columns(char32_t c) {
  if (c < 32 || c > 126) c = U'?';
  std::array<std::uint8_t, 5> cols{};
  for (int j = 0; j < 5; ++j) cols[j] = kFont[c - 32][j];
  return cols;
}

PixelRect label_plate_rect(int x, int y, std::size_t chars, int scale) {
  return {x, y, scale * (6 * static_cast<int>(chars) + 5), 13 * scale};
}

PixelRect draw_label_plate(RasterImage& img, int x, int y, std::string_view label, int scale, Rgb ink_color,
                           Rgb paper) {
  const std::u32string cps = text::decode_utf8(label);
  const PixelRect r = label_plate_rect(x, y, cps.size(), scale);
  img.fill_rect(r.x, r.y, r.width, r.height, ink_color);
  img.fill_rect(r.x + scale, r.y + scale, r.width - 2 * scale, r.height - 2 * scale, paper);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto cols = glyph_columns(cps[i]);
    const int cx = r.x + 3 * scale + 6 * scale * static_cast<int>(i);
    const int cy = r.y + 3 * scale;
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        if (cols[col] & (1u << row)) img.fill_rect(cx + col * scale, cy + row * scale, scale, scale, ink_color);
      }
    }
  }
  return r;
}

std::vector<PlateReading> read_label_plates(const RasterImage& img, int max_scale) {
  std::vector<PlateReading> found;
  RegionMask consumed(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (consumed.at(x, y) || !ink(img, x, y)) continue;
      int run = 0;
      while (x + run < img.width() && ink(img, x + run, y)) ++run;
      bool matched = false;
      for (int s = max_scale; s >= 1 && !matched; --s) {
        if (y + 13 * s > img.height() || !all_ink(img, x, y, s, 13 * s, true)) continue;
        for (int n = (run / s - 5) / 6; n >= 1 && !matched; --n) {
          if (s * (6 * n + 5) > run) continue;
          if (auto decoded = decode_plate(img, x, y, s, n)) {
            const PixelRect r = label_plate_rect(x, y, static_cast<std::size_t>(n), s);
            found.push_back({*decoded, r});
            for (int yy = r.y; yy < r.y + r.height; ++yy) {
              for (int xx = r.x; xx < r.x + r.width; ++xx) consumed.set(xx, yy);
            }
            matched = true;
          }
        }
      }
    }
  }
  return found;
}

}  // namespace cage::imaging
