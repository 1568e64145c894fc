#include "cage/metrics/embedder.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "cage/error.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/subprocess.hpp"

namespace cage::metrics {

HistogramEmbedder::HistogramEmbedder(int bins) : bins_(bins) {
  if (bins < 1 || bins > 16) throw ConfigError("histogram bins must be in [1, 16]");
}

std::vector<double> HistogramEmbedder::embed(const imaging::RasterImage& image) const {
  std::vector<double> v(static_cast<std::size_t>(dimension()), 0.0);
  const double n = static_cast<double>(image.width()) * image.height();
  if (n == 0) throw ValidationError("cannot embed an empty image");
  double sum = 0, sum_sq = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const auto c = image.at(x, y);
      const int r = c.r * bins_ / 256, g = c.g * bins_ / 256, b = c.b * bins_ / 256;
      v[static_cast<std::size_t>((r * bins_ + g) * bins_ + b)] += 1.0 / n;
      const double luma = (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0;
      sum += luma;
      sum_sq += luma * luma;
    }
  }
  const double mean = sum / n;
  v[v.size() - 2] = mean;
  v[v.size() - 1] = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
  return v;
}

std::vector<double> CommandEmbedder::embed(const imaging::RasterImage& image) const {
  TempDir dir("cage-embed");
  const auto png = dir.path() / "image.png";
  imaging::write_png(png, image);
  SubprocessSpec spec;
  spec.shell_command = expand_command_template(template_, {{"image", png.string()}});
  spec.working_dir = dir.path();
  spec.inherit_env = true;
  spec.limits.timeout = timeout_;
  spec.limits.isolate_network = false;
  spec.limits.memory_bytes = 0;
  const auto res = run_subprocess(spec);
  if (res.timed_out) throw TimeoutError("embedder " + name_ + " timed out");
  if (!res.ok()) throw BackendError("embedder " + name_ + " failed: " + res.describe());
  const auto j = nlohmann::json::parse(res.stdout_text, nullptr, false);
  if (!j.is_array()) throw BackendError("embedder " + name_ + " did not print a JSON array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw BackendError("embedder " + name_ + " printed a non-numeric feature");
    v.push_back(x.get<double>());
  }
  if (static_cast<int>(v.size()) != dimension_) {
    throw BackendError("embedder " + name_ + " returned " + std::to_string(v.size()) + " features, declared " +
                       std::to_string(dimension_));
  }
  return v;
}

FeatureSet embed_all(const EmbedderBackend& embedder, std::span<const imaging::RasterImage> images) {
  std::vector<std::vector<double>> rows;
  rows.reserve(images.size());
  for (const auto& img : images) rows.push_back(embedder.embed(img));
  return FeatureSet::from_rows(rows);
}

}  // namespace cage::metrics
