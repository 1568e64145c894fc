#pragma once

#include <vector>

#include "cage/imaging/raster.hpp"

namespace cage::imaging {

// Thresholds are fractions of the maximum gradient magnitude.
struct CannyParams {
  double sigma = 1.4;
  double low = 0.1;
  double high = 0.3;
};

struct Gradients {
  GrayImage magnitude;
  GrayImage direction;  // atan2(gy, gx), radians, image coordinates (y down)
};

// Sampled, normalized Gaussian of radius ceil(3*sigma).
std::vector<double> gaussian_kernel(double sigma);

// Separable convolution with clamp-to-edge replication. Requires sigma > 0.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// 3x3 Sobel with clamp-to-edge borders. Requires width, height >= 3.
Gradients sobel_gradients(const GrayImage& img);

// Direction bin in {0, 45, 90, 135} degrees, encoded 0..3.
int quantize_direction(double radians);

// Keeps a pixel iff it is the ridge along its quantized gradient direction.
// Ties break towards the lower-index neighbour so plateaus stay one pixel wide.
GrayImage non_maximum_suppression(const Gradients& g);

// Double threshold with 8-connected hysteresis; thresholds are absolute.
EdgeMap hysteresis(const GrayImage& suppressed, double low, double high);

EdgeMap canny(const GrayImage& gray, const CannyParams& params = {});
EdgeMap canny(const RasterImage& img, const CannyParams& params = {});

}  // namespace cage::imaging
