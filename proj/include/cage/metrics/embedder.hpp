#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "cage/imaging/raster.hpp"
#include "cage/metrics/fid.hpp"

namespace cage::metrics {

// Image -> fixed-length feature vector. Must be callable concurrently.
class EmbedderBackend {
 public:
  virtual ~EmbedderBackend() = default;
  virtual std::string name() const = 0;
  virtual int dimension() const = 0;
  virtual std::vector<double> embed(const imaging::RasterImage& image) const = 0;
};

// Mock embedder: normalized joint RGB histogram with `bins` levels per
// channel, followed by the mean and standard deviation of luma / 255.
class HistogramEmbedder final : public EmbedderBackend {
 public:
  explicit HistogramEmbedder(int bins = 4);
  std::string name() const override { return "histogram"; }
  int dimension() const override { return bins_ * bins_ * bins_ + 2; }
  std::vector<double> embed(const imaging::RasterImage& image) const override;

 private:
  int bins_;
};

// Runs a command template with {image} bound to a PNG path; stdout holds a
// JSON array of `dimension` numbers.
class CommandEmbedder final : public EmbedderBackend {
 public:
  CommandEmbedder(std::string name, std::string command_template, int dimension, std::chrono::milliseconds timeout)
      : name_(std::move(name)), template_(std::move(command_template)), dimension_(dimension), timeout_(timeout) {}
  std::string name() const override { return name_; }
  int dimension() const override { return dimension_; }
  std::vector<double> embed(const imaging::RasterImage& image) const override;

 private:
  std::string name_;
  std::string template_;
  int dimension_;
  std::chrono::milliseconds timeout_;
};

FeatureSet embed_all(const EmbedderBackend& embedder, std::span<const imaging::RasterImage> images);

}  // namespace cage::metrics
