#include "cage/refine/diffusion.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/subprocess.hpp"
#include "cage/text.hpp"

namespace cage::refine {

using imaging::RasterImage;
using imaging::Rgb;

RasterImage IdentityDiffusion::refine(const RefinementRequest& request) const {
  return imaging::overlay_edges(request.init_image, request.edge_map);
}

namespace {

void rgb_to_hsv(Rgb c, double& h, double& s, double& v) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0 ? d / mx : 0;
  if (d == 0) {
    h = 0;
  } else if (mx == r) {
    h = 60 * std::fmod((g - b) / d + 6, 6.0);
  } else if (mx == g) {
    h = 60 * ((b - r) / d + 2);
  } else {
    h = 60 * ((r - g) / d + 4);
  }
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = v - c;
  return {(r + m) * 255, (g + m) * 255, (b + m) * 255};
}

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::clamp(std::lround(x), 0L, 255L)); }

}  // namespace

RasterImage RecolorDiffusion::refine(const RefinementRequest& request) const {
  const std::uint64_t h = codec::derive_seed(request.style.seed, "recolor");
  const double angle = (30.0 + static_cast<double>(h % 300)) * request.style.strength;
  const double tint_weight = 0.25 * request.style.strength;
  const std::array<double, 3> tint = hsv_to_rgb(static_cast<double>((h >> 16) % 360), 0.35, 1.0);
  // Horizontal wave displacement: strokes survive, label plates do not.
  const int amp = std::max(1, static_cast<int>(std::lround(3.0 * request.style.strength)));
  const double period = 7.0 + static_cast<double>((h >> 32) % 5);
  RasterImage out(request.width, request.height);
  for (int y = 0; y < request.height; ++y) {
    const int dx = static_cast<int>(std::lround(amp * std::sin(2.0 * std::numbers::pi * y / period)));
    for (int x = 0; x < request.width; ++x) {
      const int sx = std::clamp(x + dx, 0, request.width - 1);
      double hue, sat, val;
      rgb_to_hsv(request.init_image.at(sx, y), hue, sat, val);
      const auto rgb = hsv_to_rgb(std::fmod(hue + angle, 360.0), sat, val);
      out.set(x, y,
              {to_byte(rgb[0] * (1 - tint_weight) + tint[0] * tint_weight),
               to_byte(rgb[1] * (1 - tint_weight) + tint[1] * tint_weight),
               to_byte(rgb[2] * (1 - tint_weight) + tint[2] * tint_weight)});
    }
  }
  return out;
}

nlohmann::json request_to_wire(const RefinementRequest& request) {
  return {{"prompt", request.style.prompt},
          {"strength", request.style.strength},
          {"seed", request.style.seed},
          {"width", request.width},
          {"height", request.height},
          {"params", request.style.params},
          {"edge_map_png", codec::base64_encode(imaging::encode_binary_png(request.edge_map))},
          {"mask_png", codec::base64_encode(imaging::encode_binary_png(request.preservation_mask))},
          {"init_image_png", codec::base64_encode(imaging::encode_png(request.init_image))}};
}

RasterImage HttpDiffusion::refine(const RefinementRequest& request) const {
  httplib::Client client(opts_.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout).count();
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!opts_.api_key_env.empty()) {
    const char* key = std::getenv(opts_.api_key_env.c_str());
    if (!key) throw ConfigError("environment variable " + opts_.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(opts_.path, headers, request_to_wire(request).dump(), "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write) {
      throw TimeoutError("diffusion request to " + opts_.base_url + " failed: " + httplib::to_string(res.error()));
    }
    throw BackendError("diffusion request to " + opts_.base_url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("diffusion endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  const auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("image_png") || !j["image_png"].is_string()) {
    throw BackendError("diffusion response has no image_png field");
  }
  return imaging::decode_png(codec::base64_decode(j["image_png"].get<std::string>()));
}

RasterImage CommandDiffusion::refine(const RefinementRequest& request) const {
  TempDir dir("cage-diffusion");
  const auto& d = dir.path();
  codec::write_file((d / "request.json").string(), request_to_wire(request).dump());
  imaging::write_binary_png(d / "edges.png", request.edge_map);
  imaging::write_binary_png(d / "mask.png", request.preservation_mask);
  imaging::write_png(d / "init.png", request.init_image);
  SubprocessSpec spec;
  spec.shell_command = expand_command_template(template_, {{"request", (d / "request.json").string()},
                                                           {"edges", (d / "edges.png").string()},
                                                           {"mask", (d / "mask.png").string()},
                                                           {"init", (d / "init.png").string()},
                                                           {"output", (d / "refined.png").string()},
                                                           {"workdir", d.string()}});
  spec.working_dir = d;
  spec.inherit_env = true;
  spec.limits.timeout = timeout_;
  spec.limits.isolate_network = false;
  spec.limits.memory_bytes = 0;
  const auto res = run_subprocess(spec);
  if (res.timed_out) throw TimeoutError("diffusion command " + name_ + " timed out");
  if (!res.ok()) throw BackendError("diffusion command " + name_ + " failed: " + res.describe());
  if (!std::filesystem::exists(d / "refined.png")) throw BackendError("diffusion command " + name_ + " wrote no image");
  try {
    return imaging::read_png(d / "refined.png");
  } catch (const Error&) {
    throw BackendError("diffusion command " + name_ + " wrote an undecodable refined.png");
  }
}

void PlateLabelRenderer::draw(RasterImage& target, std::span<const imaging::TextRegion> regions) const {
  for (const auto& r : regions) {
    const int scale = std::clamp(r.bbox.height / 13, 1, 4);
    const auto n = text::decode_utf8(r.text).size();
    const auto fit = imaging::label_plate_rect(r.bbox.x, r.bbox.y, n, scale);
    if (fit.x + fit.width > target.width() || fit.y + fit.height > target.height()) {
      throw DimensionError("label \"" + r.text + "\" does not fit the target image");
    }
    imaging::draw_label_plate(target, r.bbox.x, r.bbox.y, r.text, scale);
  }
}

StylizeResult stylize_with_preservation(const synth::RenderOutput& prog, const StyleSpec& style,
                                        const DiffusionBackend& backend, const RefineConfig& cfg,
                                        const LabelRenderer* labels) {
  StylizeResult out;
  out.request = build_refinement_request(prog, style, cfg);
  out.raw = backend.refine(out.request);
  if (out.raw.width() != out.request.width || out.raw.height() != out.request.height) {
    throw DimensionError("diffusion backend " + backend.name() + " returned " + std::to_string(out.raw.width()) +
                         "x" + std::to_string(out.raw.height()) + ", expected " + std::to_string(out.request.width) +
                         "x" + std::to_string(out.request.height));
  }
  if (labels) {
    out.image = out.raw;
    labels->draw(out.image, prog.regions);
  } else {
    out.image = imaging::composite_regions(out.raw, prog.image, out.request.preservation_mask, cfg.composite);
  }
  return out;
}

double edge_respect(const RasterImage& prog, const RasterImage& refined, const imaging::CannyParams& params) {
  return imaging::edge_overlap(imaging::canny(prog, params), imaging::canny(refined, params));
}

}  // namespace cage::refine
