#include "cage/imaging/canny.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cage/error.hpp"

namespace cage::imaging {

namespace {

// Relative tolerance used when comparing magnitudes during suppression, so
// that exact plateaus (symmetric step edges) are treated as ties regardless of
// summation order.
constexpr double kTieTolerance = 1e-9;

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();

  GrayImage tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * img.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  }
  return out;
}

Gradients sobel_gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) throw DimensionError("sobel requires at least 3x3 pixels");
  Gradients g{GrayImage(w, h), GrayImage(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto p = [&](int dx, int dy) { return img.clamped(x + dx, y + dy); };
      const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      g.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
      g.direction.at(x, y) = std::atan2(gy, gx);
    }
  }
  return g;
}

int quantize_direction(double radians) {
  double deg = radians * 180.0 / std::numbers::pi;
  deg = std::fmod(deg, 180.0);
  if (deg < 0.0) deg += 180.0;
  if (deg < 22.5 || deg >= 157.5) return 0;
  if (deg < 67.5) return 1;
  if (deg < 112.5) return 2;
  return 3;
}

GrayImage non_maximum_suppression(const Gradients& g) {
  const GrayImage& mag = g.magnitude;
  const int w = mag.width();
  const int h = mag.height();
  double max_mag = 0.0;
  for (double v : mag.values()) max_mag = std::max(max_mag, v);
  const double eps = kTieTolerance * max_mag;

  // Neighbour offsets along the gradient, lower-index side first.
  static constexpr int kOffsets[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  GrayImage out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag.at(x, y);
      if (m <= eps) continue;
      const int bin = quantize_direction(g.direction.at(x, y));
      const int dx = kOffsets[bin][0];
      const int dy = kOffsets[bin][1];
      const double behind = mag.clamped(x - dx, y - dy);
      const double ahead = mag.clamped(x + dx, y + dy);
      if (m > behind + eps && m >= ahead - eps) out.at(x, y) = m;
    }
  }
  return out;
}

EdgeMap hysteresis(const GrayImage& suppressed, double low, double high) {
  const int w = suppressed.width();
  const int h = suppressed.height();
  EdgeMap edges(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = suppressed.at(x, y);
      if (v > 0.0 && v >= high) {
        edges.set(x, y);
        stack.emplace_back(x, y);
      }
    }
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (!edges.contains(nx, ny) || edges.at(nx, ny)) continue;
        const double v = suppressed.at(nx, ny);
        if (v > 0.0 && v >= low) {
          edges.set(nx, ny);
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

EdgeMap canny(const GrayImage& gray, const CannyParams& params) {
  if (!(params.low > 0.0 && params.low < params.high && params.high <= 1.0)) {
    throw ValidationError("canny thresholds must satisfy 0 < low < high <= 1");
  }
  const Gradients g = sobel_gradients(gaussian_blur(gray, params.sigma));
  double max_mag = 0.0;
  for (double v : g.magnitude.values()) max_mag = std::max(max_mag, v);
  if (max_mag <= 0.0) return EdgeMap(gray.width(), gray.height());
  return hysteresis(non_maximum_suppression(g), params.low * max_mag, params.high * max_mag);
}

EdgeMap canny(const RasterImage& img, const CannyParams& params) { return canny(to_grayscale(img), params); }

}  // namespace cage::imaging
