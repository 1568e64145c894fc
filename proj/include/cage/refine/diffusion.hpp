#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "cage/imaging/raster.hpp"
#include "cage/refine/request.hpp"

namespace cage::refine {

// Edge-conditioned image generator. Must tolerate concurrent calls and return
// an image of the requested size.
class DiffusionBackend {
 public:
  virtual ~DiffusionBackend() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  virtual imaging::RasterImage refine(const RefinementRequest& request) const = 0;
};

// Mock: the init image with the edge map painted over it.
class IdentityDiffusion final : public DiffusionBackend {
 public:
  std::string name() const override { return "identity"; }
  bool deterministic() const override { return true; }
  imaging::RasterImage refine(const RefinementRequest& request) const override;
};

// Mock: rotates every hue by a seed-derived angle, tints the whole image
// (whites included) towards a seed-derived colour and warps rows by a small
// sinusoidal shift, which garbles rendered text the way real diffusion does.
class RecolorDiffusion final : public DiffusionBackend {
 public:
  std::string name() const override { return "recolor"; }
  bool deterministic() const override { return true; }
  imaging::RasterImage refine(const RefinementRequest& request) const override;
};

// JSON over HTTP; field names are in schemas/diffusion_backend.schema.json.
class HttpDiffusion final : public DiffusionBackend {
 public:
  struct Options {
    std::string name = "http-diffusion";
    std::string base_url;
    std::string path = "/refine";
    std::string api_key_env;
    std::chrono::milliseconds timeout{300'000};
  };
  explicit HttpDiffusion(Options opts) : opts_(std::move(opts)) {}
  std::string name() const override { return opts_.name; }
  bool deterministic() const override { return false; }
  imaging::RasterImage refine(const RefinementRequest& request) const override;

 private:
  Options opts_;
};

// Writes request.json (same fields as the HTTP body) plus edges.png, mask.png
// and init.png into a scratch directory and runs a command template with
// {request}, {edges}, {mask}, {init}, {output} and {workdir}.
class CommandDiffusion final : public DiffusionBackend {
 public:
  CommandDiffusion(std::string name, std::string command_template, std::chrono::milliseconds timeout)
      : name_(std::move(name)), template_(std::move(command_template)), timeout_(timeout) {}
  std::string name() const override { return name_; }
  bool deterministic() const override { return false; }
  imaging::RasterImage refine(const RefinementRequest& request) const override;

 private:
  std::string name_;
  std::string template_;
  std::chrono::milliseconds timeout_;
};

// Wire body shared by the HTTP and command adapters.
nlohmann::json request_to_wire(const RefinementRequest& request);

// Draws labels into a stylized image instead of copying the original pixels.
class LabelRenderer {
 public:
  virtual ~LabelRenderer() = default;
  virtual std::string name() const = 0;
  virtual void draw(imaging::RasterImage& target, std::span<const imaging::TextRegion> regions) const = 0;
};

// Re-draws each region as a glyph-font label plate fitted to its box.
class PlateLabelRenderer final : public LabelRenderer {
 public:
  std::string name() const override { return "plate"; }
  void draw(imaging::RasterImage& target, std::span<const imaging::TextRegion> regions) const override;
};

struct StylizeResult {
  imaging::RasterImage image;  // I_ref
  imaging::RasterImage raw;    // backend output before recomposition
  RefinementRequest request;
};

// I_ref = backend output with the label regions recomposited from I_prog
// (or re-drawn by `labels` when given). Throws DimensionError naming expected
// and actual sizes when the backend returns the wrong size.
StylizeResult stylize_with_preservation(const synth::RenderOutput& prog, const StyleSpec& style,
                                        const DiffusionBackend& backend, const RefineConfig& cfg = {},
                                        const LabelRenderer* labels = nullptr);

// Fraction of I_prog edge pixels that are also edges of I_ref.
double edge_respect(const imaging::RasterImage& prog, const imaging::RasterImage& refined,
                    const imaging::CannyParams& params = {});

}  // namespace cage::refine
