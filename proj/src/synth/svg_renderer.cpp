#include "cage/synth/svg_renderer.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cage/error.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/text.hpp"

namespace cage::synth {

namespace pt = boost::property_tree;
using imaging::RasterImage;
using imaging::Rgb;

namespace {

std::optional<Rgb> parse_color(const std::string& raw) {
  const std::string v = text::fold(raw);
  if (v.empty() || v == "none" || v == "transparent") return std::nullopt;
  static const std::map<std::string, Rgb> named = {
      {"black", {0, 0, 0}},         {"white", {255, 255, 255}}, {"red", {220, 40, 40}},
      {"green", {40, 160, 60}},     {"blue", {40, 80, 220}},    {"gray", {128, 128, 128}},
      {"grey", {128, 128, 128}},    {"lightgray", {211, 211, 211}}, {"orange", {240, 150, 30}},
      {"yellow", {240, 220, 60}},   {"purple", {130, 60, 160}}, {"navy", {20, 30, 110}},
      {"teal", {0, 128, 128}},      {"lightblue", {173, 216, 230}}, {"pink", {240, 170, 190}},
      {"brown", {140, 90, 40}},
  };
  if (auto it = named.find(v); it != named.end()) return it->second;
  if (v[0] == '#' && (v.size() == 7 || v.size() == 4)) {
    auto hex = [&](std::string h) { return static_cast<std::uint8_t>(std::stoi(h, nullptr, 16)); };
    try {
      if (v.size() == 7) return Rgb{hex(v.substr(1, 2)), hex(v.substr(3, 2)), hex(v.substr(5, 2))};
      return Rgb{hex(std::string(2, v[1])), hex(std::string(2, v[2])), hex(std::string(2, v[3]))};
    } catch (...) {
    }
  }
  throw ParseError("unsupported colour: " + raw);
}

double number_attr(const pt::ptree& attrs, const char* key, double fallback) {
  const auto v = attrs.get_optional<std::string>(key);
  if (!v) return fallback;
  std::string s = text::trim(*v);
  if (s.size() > 2 && s.substr(s.size() - 2) == "px") s.resize(s.size() - 2);
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(d)) throw ParseError("");
    return d;
  } catch (...) {
    throw ParseError(std::string("invalid numeric attribute ") + key + "=\"" + *v + "\"");
  }
}

std::string string_attr(const pt::ptree& attrs, const char* key, const std::string& fallback) {
  return attrs.get<std::string>(key, fallback);
}

void stamp(RasterImage& img, int cx, int cy, int width, Rgb c) {
  const int half = width / 2;
  img.fill_rect(cx - half, cy - half, std::max(1, width), std::max(1, width), c);
}

void draw_line(RasterImage& img, double x1, double y1, double x2, double y2, int width, Rgb c) {
  int x0 = static_cast<int>(std::lround(x1)), y0 = static_cast<int>(std::lround(y1));
  const int xe = static_cast<int>(std::lround(x2)), ye = static_cast<int>(std::lround(y2));
  const int dx = std::abs(xe - x0), sx = x0 < xe ? 1 : -1;
  const int dy = -std::abs(ye - y0), sy = y0 < ye ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    stamp(img, x0, y0, width, c);
    if (x0 == xe && y0 == ye) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string collect_text(const pt::ptree& node) {
  std::string s = node.data();
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    s += " " + collect_text(child);
  }
  return s;
}

struct Context {
  RasterImage& img;
  std::vector<imaging::TextRegion>& regions;
  std::optional<StructureGraph>& structure;
};

void render_children(const pt::ptree& parent, Context& ctx) {
  for (const auto& [name, node] : parent) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    const pt::ptree empty;
    const pt::ptree& attrs = node.get_child("<xmlattr>", empty);
    const int stroke_width = std::max(1, static_cast<int>(std::lround(number_attr(attrs, "stroke-width", 1))));
    if (name == "g") {
      render_children(node, ctx);
    } else if (name == "rect") {
      const double x = number_attr(attrs, "x", 0), y = number_attr(attrs, "y", 0);
      const double w = number_attr(attrs, "width", 0), h = number_attr(attrs, "height", 0);
      const int xi = static_cast<int>(std::lround(x)), yi = static_cast<int>(std::lround(y));
      const int wi = static_cast<int>(std::lround(w)), hi = static_cast<int>(std::lround(h));
      if (auto fill = parse_color(string_attr(attrs, "fill", "black"))) ctx.img.fill_rect(xi, yi, wi, hi, *fill);
      if (auto stroke = parse_color(string_attr(attrs, "stroke", "none"))) {
        ctx.img.fill_rect(xi, yi, wi, stroke_width, *stroke);
        ctx.img.fill_rect(xi, yi + hi - stroke_width, wi, stroke_width, *stroke);
        ctx.img.fill_rect(xi, yi, stroke_width, hi, *stroke);
        ctx.img.fill_rect(xi + wi - stroke_width, yi, stroke_width, hi, *stroke);
      }
    } else if (name == "line") {
      if (auto stroke = parse_color(string_attr(attrs, "stroke", "black"))) {
        draw_line(ctx.img, number_attr(attrs, "x1", 0), number_attr(attrs, "y1", 0), number_attr(attrs, "x2", 0),
                  number_attr(attrs, "y2", 0), stroke_width, *stroke);
      }
    } else if (name == "circle") {
      const double cx = number_attr(attrs, "cx", 0), cy = number_attr(attrs, "cy", 0), r = number_attr(attrs, "r", 0);
      const auto fill = parse_color(string_attr(attrs, "fill", "black"));
      const auto stroke = parse_color(string_attr(attrs, "stroke", "none"));
      for (int y = static_cast<int>(cy - r - stroke_width); y <= static_cast<int>(cy + r + stroke_width); ++y) {
        for (int x = static_cast<int>(cx - r - stroke_width); x <= static_cast<int>(cx + r + stroke_width); ++x) {
          if (!ctx.img.contains(x, y)) continue;
          const double d = std::hypot(x - cx, y - cy);
          if (stroke && std::abs(d - r) <= stroke_width / 2.0 + 0.5) {
            ctx.img.set(x, y, *stroke);
          } else if (fill && d < r) {
            ctx.img.set(x, y, *fill);
          }
        }
      }
    } else if (name == "text") {
      const std::string label = text::normalize_whitespace(collect_text(node));
      if (label.empty()) continue;
      const int x = static_cast<int>(std::lround(number_attr(attrs, "x", 0)));
      const int y = static_cast<int>(std::lround(number_attr(attrs, "y", 0)));
      const int scale = std::clamp(static_cast<int>(std::lround(number_attr(attrs, "font-size", 16) / 8.0)), 1, 4);
      const Rgb ink = parse_color(string_attr(attrs, "fill", "black")).value_or(imaging::kBlack);
      const imaging::PixelRect r = imaging::label_plate_rect(x, y, text::decode_utf8(label).size(), scale);
      if (r.x < 0 || r.y < 0 || r.x + r.width > ctx.img.width() || r.y + r.height > ctx.img.height()) {
        throw ParseError("text \"" + label + "\" does not fit inside the canvas");
      }
      imaging::draw_label_plate(ctx.img, x, y, label, scale, ink);
      ctx.regions.push_back({label, r});
    } else if (name == "metadata") {
      if (attrs.get<std::string>("id", "") != "structure") continue;
      try {
        ctx.structure = structure_from_json(nlohmann::json::parse(node.data()));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("structure metadata is not valid JSON: ") + e.what());
      }
    }
  }
}

}  // namespace

SvgRender render_svg(std::string_view source, long long max_pixels) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(source)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("SVG parse error: ") + e.what());
  }
  const auto svg = tree.get_child_optional("svg");
  if (!svg) throw ParseError("document has no <svg> root element");
  const pt::ptree empty;
  const pt::ptree& attrs = svg->get_child("<xmlattr>", empty);
  const int width = static_cast<int>(std::lround(number_attr(attrs, "width", 256)));
  const int height = static_cast<int>(std::lround(number_attr(attrs, "height", 256)));
  if (width < 1 || height < 1) throw ParseError("svg dimensions must be positive");
  if (static_cast<long long>(width) * height > max_pixels) {
    throw ValidationError("svg canvas " + std::to_string(width) + "x" + std::to_string(height) +
                          " exceeds the output pixel limit");
  }
  SvgRender out{RasterImage(width, height, imaging::kWhite), {}, std::nullopt};
  Context ctx{out.image, out.regions, out.structure};
  render_children(*svg, ctx);
  return out;
}

}  // namespace cage::synth
