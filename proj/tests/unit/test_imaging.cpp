#include <doctest.h>

#include <random>

#include "cage/error.hpp"
#include "cage/imaging/canny.hpp"
#include "cage/imaging/compositing.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/imaging/png_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cage;
using namespace cage::imaging;

namespace {

GrayImage constant(int w, int h, double v) { return GrayImage(w, h, v); }

GrayImage vertical_step(int w, int h, int at) {
  GrayImage g(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = at; x < w; ++x) g.at(x, y) = 255.0;
  }
  return g;
}

GrayImage rectangle(int w, int h) {
  GrayImage g(w, h, 20.0);
  for (int y = 10; y < 30; ++y) {
    for (int x = 12; x < 36; ++x) g.at(x, y) = 200.0;
  }
  return g;
}

}  // namespace

TEST_CASE("gaussian kernel is normalized and symmetric") {
  const auto k = gaussian_kernel(1.4);
  CHECK(k.size() == 11);
  double s = 0;
  for (double v : k) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.front() == doctest::Approx(k.back()));
  CHECK_THROWS_AS(gaussian_kernel(0.0), ValidationError);
}

TEST_CASE("direction quantization") {
  CHECK(quantize_direction(0.0) == 0);
  CHECK(quantize_direction(std::numbers::pi) == 0);
  CHECK(quantize_direction(std::numbers::pi / 4) == 1);
  CHECK(quantize_direction(std::numbers::pi / 2) == 2);
  CHECK(quantize_direction(-std::numbers::pi / 2) == 2);
  CHECK(quantize_direction(3 * std::numbers::pi / 4) == 3);
}

TEST_CASE("canny on a constant image finds nothing") {
  CHECK(canny(constant(32, 24, 0.0)).count() == 0);
  CHECK(canny(constant(32, 24, 117.0)).count() == 0);
}

TEST_CASE("canny on a vertical step gives one thin column") {
  const auto edges = canny(vertical_step(40, 30, 20));
  for (int y = 0; y < 30; ++y) {
    int n = 0;
    for (int x = 0; x < 40; ++x) {
      if (!edges.at(x, y)) continue;
      ++n;
      CHECK(std::abs(x - 20) <= 1);
    }
    CHECK(n == 1);
  }
}

TEST_CASE("canny rejects bad thresholds") {
  CHECK_THROWS_AS(canny(constant(8, 8, 0), {1.0, 0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(canny(constant(8, 8, 0), {1.0, 0.0, 0.4}), ValidationError);
  CHECK_THROWS_AS(sobel_gradients(constant(2, 8, 0)), DimensionError);
}

TEST_CASE("canny matches the brute-force reference") {
  SUBCASE("rectangle") {
    const auto g = rectangle(48, 40);
    const auto got = canny(g);
    CHECK(got.count() > 0);
    CHECK(got == oracle::canny(g, {}));
  }
  SUBCASE("smooth random fields") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int t = 0; t < 5; ++t) {
      GrayImage g(24, 20);
      // Blocky noise keeps magnitudes well away from the tie tolerance.
      for (int by = 0; by < 20; by += 4) {
        for (int bx = 0; bx < 24; bx += 4) {
          const double v = u(rng);
          for (int y = by; y < by + 4; ++y) {
            for (int x = bx; x < bx + 4; ++x) g.at(x, y) = v;
          }
        }
      }
      const CannyParams p{1.0, 0.15, 0.35};
      CHECK(canny(g, p) == oracle::canny(g, p));
    }
  }
}

TEST_CASE("png round trip") {
  testing::TempDir dir;
  RasterImage img(7, 5);
  img.set(3, 2, Rgb{10, 20, 30});
  write_png(dir / "x.png", img);
  CHECK(read_png(dir / "x.png") == img);

  EdgeMap e(6, 4);
  e.set(1, 1);
  e.set(5, 3);
  CHECK(decode_binary_png<EdgeTag>(encode_binary_png(e)) == e);
  const std::vector<std::uint8_t> junk{1, 2, 3};
  CHECK_THROWS(decode_png(junk));
}

TEST_CASE("label plates render and read back") {
  RasterImage img(200, 80);
  const auto r1 = draw_label_plate(img, 4, 4, "Aorta", 2);
  const auto r2 = draw_label_plate(img, 4, 40, "left ventricle", 1);
  CHECK(r1 == label_plate_rect(4, 4, 5, 2));
  CHECK(r1.height == 26);
  const auto plates = read_label_plates(img);
  REQUIRE(plates.size() == 2);
  CHECK(plates[0].text == "Aorta");
  CHECK(plates[0].bbox == r1);
  CHECK(plates[1].text == "left ventricle");
  CHECK(plates[1].bbox == r2);
}

TEST_CASE("text mask, compositing and masked equality") {
  std::vector<TextRegion> regions{{"a", {2, 2, 4, 3}}, {"b", {18, 10, 5, 5}}};
  const auto mask = build_text_mask(regions, 20, 14, 1);
  CHECK(mask.at(1, 1));
  CHECK(mask.at(6, 5));
  CHECK_FALSE(mask.at(7, 5));
  CHECK(mask.at(19, 13));
  CHECK(mask.count() == 6 * 5 + 3 * 5);

  const RasterImage base(20, 14, kBlack);
  RasterImage src(20, 14, kWhite);
  src.set(3, 3, Rgb{1, 2, 3});
  const auto out = composite_regions(base, src, mask);
  CHECK(masked_equal(out, src, mask));
  CHECK(out.at(10, 10) == kBlack);
  CHECK(out.at(3, 3) == (Rgb{1, 2, 3}));

  const auto feathered = composite_regions(base, src, mask, CompositeMode::feathered);
  CHECK(masked_equal(feathered, src, mask));
  const auto near = feathered.at(8, 3);
  CHECK(near.r > 0);
  CHECK(near.r < 255);
  CHECK(feathered.at(12, 3) == kBlack);
  CHECK(parse_composite_mode("pixel-copy") == CompositeMode::pixel_copy);
}

TEST_CASE("edge overlap") {
  EdgeMap a(4, 4), b(4, 4);
  CHECK(edge_overlap(a, b) == 1.0);
  a.set(0, 0);
  a.set(1, 1);
  b.set(1, 1);
  CHECK(edge_overlap(a, b) == 0.5);
}

TEST_CASE("lowering the high threshold never removes edges") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int t = 0; t < 5; ++t) {
    GrayImage g(32, 32);
    for (int by = 0; by < 32; by += 8) {
      for (int bx = 0; bx < 32; bx += 8) {
        const double v = u(rng);
        for (int y = by; y < by + 8; ++y) {
          for (int x = bx; x < bx + 8; ++x) g.at(x, y) = v;
        }
      }
    }
    const auto strict = canny(g, {1.4, 0.1, 0.5});
    const auto loose = canny(g, {1.4, 0.1, 0.3});
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (strict.at(x, y)) CHECK(loose.at(x, y));
      }
    }
    CHECK(canny(g) == canny(g));
  }
}

TEST_CASE("horizontal edges are one pixel thick") {
  GrayImage g(30, 40, 0.0);
  for (int y = 17; y < 40; ++y) {
    for (int x = 0; x < 30; ++x) g.at(x, y) = 255.0;
  }
  const auto edges = canny(g);
  for (int x = 0; x < 30; ++x) {
    int n = 0;
    for (int y = 0; y < 40; ++y) n += edges.at(x, y);
    CHECK(n == 1);
  }
}
