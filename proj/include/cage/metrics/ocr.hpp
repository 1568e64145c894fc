#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "cage/imaging/raster.hpp"

namespace cage::metrics {

struct OcrToken {
  std::string text;
  imaging::PixelRect bbox;
};

struct OcrResult {
  std::vector<OcrToken> tokens;
  // Token texts joined with single spaces, in token order.
  std::string concatenated_text() const;
};

class OcrBackend {
 public:
  virtual ~OcrBackend() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  // Must be callable concurrently. Throws BackendError on failure.
  virtual OcrResult recognize(const imaging::RasterImage& image) const = 0;
};

// Exact reader for label plates drawn with the built-in glyph font. One token
// per plate, in reading order (top to bottom, then left to right).
class GlyphOcr final : public OcrBackend {
 public:
  std::string name() const override { return "glyph"; }
  bool deterministic() const override { return true; }
  OcrResult recognize(const imaging::RasterImage& image) const override;
};

// Runs a command template with {image} bound to a PNG path. The command prints
// {"tokens":[{"text":..., "bbox":[x,y,w,h]}, ...]} on stdout.
class CommandOcr final : public OcrBackend {
 public:
  CommandOcr(std::string name, std::string command_template, std::chrono::milliseconds timeout)
      : name_(std::move(name)), template_(std::move(command_template)), timeout_(timeout) {}
  std::string name() const override { return name_; }
  bool deterministic() const override { return true; }
  OcrResult recognize(const imaging::RasterImage& image) const override;

 private:
  std::string name_;
  std::string template_;
  std::chrono::milliseconds timeout_;
};

OcrResult ocr_result_from_json(const std::string& text);

}  // namespace cage::metrics
