#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>

#include "cage/error.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/metrics/agreement.hpp"
#include "cage/metrics/assignment.hpp"
#include "cage/metrics/cost.hpp"
#include "cage/metrics/embedder.hpp"
#include "cage/metrics/fid.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/metrics/pairs.hpp"
#include "cage/metrics/text_metrics.hpp"
#include "oracles.hpp"

using namespace cage;
using namespace cage::metrics;

namespace {

OcrResult tokens(std::initializer_list<const char*> words) {
  OcrResult r;
  for (const char* w : words) r.tokens.push_back({w, {}});
  return r;
}

const std::vector<std::string> kDigestive{"mouth",    "esophagus",       "stomach",         "liver", "gallbladder",
                                          "pancreas", "small intestine", "large intestine", "rectum"};

Eigen::MatrixXd random_psd(std::mt19937& rng, int n, int rank) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, rank);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < rank; ++j) a(i, j) = nd(rng);
  }
  return a * a.transpose();
}

FeatureSet gaussian_1d(std::size_t n, double mean, double var, unsigned seed) {
  // Exact sample moments: standardize, then rescale.
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = nd(rng);
  const double m = x.mean();
  x.array() -= m;
  const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(n - 1));
  x *= std::sqrt(var) / sd;
  x.array() += mean;
  return FeatureSet(x);
}

}  // namespace

TEST_CASE("levenshtein agrees with the dynamic-programming oracle") {
  std::mt19937 rng(5);
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "é", "ß", "α", "中"};
  std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, alphabet.size() - 1);
  auto make = [&] {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s += alphabet[pick(rng)];
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = make();
    const auto b = make();
    REQUIRE(levenshtein(a, b) == oracle::levenshtein(a, b));
  }
  CHECK(levenshtein("mitochondria", "mitochndira") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("naïve", "naive") == 1);
}

TEST_CASE("cer and lem on fixed cases") {
  const std::vector<std::string> aorta{"aorta"};
  CHECK(cer(aorta, tokens({"arota"})) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(cer(aorta, tokens({"AORTA"})) == 0.0);
  CHECK(cer(aorta, tokens({})) == 1.0);

  OcrResult without_rectum;
  for (std::size_t i = 0; i + 1 < kDigestive.size(); ++i) without_rectum.tokens.push_back({kDigestive[i], {}});
  CHECK(lem(kDigestive, without_rectum) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(missing_labels(kDigestive, without_rectum) == std::vector<std::string>{"rectum"});
  const std::vector<std::string> none;
  CHECK_THROWS_AS(lem(none, without_rectum), ValidationError);
}

TEST_CASE("cer candidates join neighbouring tokens") {
  const auto c = cer_candidates(tokens({"small", "intestine", "liver"}));
  CHECK(std::find(c.begin(), c.end(), "small intestine") != c.end());
  CHECK(std::find(c.begin(), c.end(), "small intestine liver") != c.end());
  const std::vector<std::string> labels{"small intestine"};
  CHECK(cer(labels, tokens({"small", "intestine"})) == 0.0);
}

TEST_CASE("assignment matching cannot reuse a token") {
  const std::vector<std::string> labels{"vein", "vain"};
  const auto ocr = tokens({"vein"});
  CHECK(cer(labels, ocr, CerMatching::independent) == doctest::Approx(1.0 / 8.0));
  CHECK(cer(labels, ocr, CerMatching::assignment) == doctest::Approx(4.0 / 8.0));
}

TEST_CASE("hungarian assignment matches brute force") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  for (int t = 0; t < 50; ++t) {
    const int rows = 1 + t % 4;
    const int cols = rows + t % 3;
    std::vector<std::vector<double>> c(rows, std::vector<double>(cols));
    for (auto& r : c) {
      for (auto& v : r) v = std::round(u(rng));
    }
    const auto got = min_cost_assignment(c);
    double got_cost = 0;
    for (int i = 0; i < rows; ++i) got_cost += c[i][got[i]];
    std::vector<int> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e18;
    do {
      double s = 0;
      for (int i = 0; i < rows; ++i) s += c[i][perm[i]];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got_cost == doctest::Approx(best));
  }
}

TEST_CASE("matrix square root of PSD matrices") {
  std::mt19937 rng(17);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + (t * 13) % 64;
    const int rank = t % 3 == 0 ? std::max(1, n / 2) : n;
    const auto m = random_psd(rng, n, rank);
    const auto s = matrix_sqrt_psd(m);
    CHECK((s * s - m).norm() / std::max(1e-300, m.norm()) < 1e-8);
    CHECK((s - s.transpose()).norm() < 1e-9 * std::max(1.0, s.norm()));
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0, 0, -1;
  CHECK_THROWS(matrix_sqrt_psd(bad));
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS(matrix_sqrt_psd(asym));
}

TEST_CASE("fid closed forms") {
  const auto a = gaussian_1d(200, 0.0, 1.0, 1);
  CHECK(fid(a, a) <= 1e-6);
  CHECK(fid(a, gaussian_1d(300, 3.0, 1.0, 2)) == doctest::Approx(9.0).epsilon(1e-6 / 9.0));
  CHECK(fid(gaussian_1d(200, 0.0, 4.0, 3), gaussian_1d(200, 0.0, 1.0, 4)) ==
        doctest::Approx(1.0).epsilon(1e-6));

  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(40, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  const FeatureSet fx(x);
  CHECK(fid(fx, fx) <= 1e-6);
  Eigen::MatrixXd y = x;
  y.col(2).array() += 2.0;
  CHECK(fid(fx, FeatureSet(y)) == doctest::Approx(4.0).epsilon(1e-6));

  CHECK_THROWS_AS(fid(fx, a), DimensionError);
  CHECK_THROWS_AS(fid(FeatureSet::from_rows({{1.0}}), a), ValidationError);
  CHECK_THROWS_AS(FeatureSet::from_rows({{1.0, 2.0}, {1.0}}), DimensionError);
}

TEST_CASE("histogram embedder") {
  const HistogramEmbedder e(4);
  CHECK(e.dimension() == 66);
  const auto v = e.embed(imaging::RasterImage(8, 8, imaging::kWhite));
  CHECK(v.size() == 66u);
  CHECK(std::accumulate(v.begin(), v.begin() + 64, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("krippendorff alpha") {
  using G = RatingGrid;
  const G perfect{{3, 3, 3}, {1, 1, 1}, {5, 5, std::nullopt}, {2, 2, 2}};
  CHECK(krippendorff_alpha(perfect, AlphaMetric::ordinal) == doctest::Approx(1.0));
  CHECK(krippendorff_alpha(perfect, AlphaMetric::interval) == doctest::Approx(1.0));

  const G fixture{{1, 1}, {2, 2}, {3, 3}, {4, 5}};
  CHECK(std::abs(krippendorff_alpha(fixture, AlphaMetric::interval) - 104.0 / 111.0) < 1e-9);
  CHECK(std::abs(oracle::krippendorff_alpha_interval(fixture) - 104.0 / 111.0) < 1e-9);

  std::mt19937 rng(23);
  std::uniform_int_distribution<int> score(1, 5), miss(0, 5);
  for (int t = 0; t < 20; ++t) {
    G g(12, std::vector<std::optional<double>>(6));
    for (auto& u : g) {
      const int base = score(rng);
      for (auto& v : u) {
        if (miss(rng) == 0) continue;
        v = std::clamp(base + score(rng) / 3 - 1, 1, 5);
      }
    }
    CHECK(krippendorff_alpha(g, AlphaMetric::interval) ==
          doctest::Approx(oracle::krippendorff_alpha_interval(g)).epsilon(1e-9));
    CHECK(krippendorff_alpha(g, AlphaMetric::ordinal) ==
          doctest::Approx(oracle::krippendorff_alpha_ordinal(g)).epsilon(1e-9));
    G permuted = g;
    for (auto& u : permuted) std::reverse(u.begin(), u.end());
    CHECK(krippendorff_alpha(permuted) == doctest::Approx(krippendorff_alpha(g)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(krippendorff_alpha(G{{1, 1}}), ValidationError);
  CHECK_THROWS_AS(krippendorff_alpha(G{{2, 2}, {2, 2}}), ValidationError);
}

TEST_CASE("ratings csv") {
  const auto m = parse_ratings_csv(
      "item,annotator,color_quality,professional_appearance,visual_engagement,visual_hierarchy\n"
      "d1,a,4,4,3,5\nd1,b,4,5,3,5\nd2,a,2,2,1,2\nd2,b,2,2,2,2\n");
  CHECK(m.items.size() == 2);
  CHECK(m.annotators.size() == 2);
  CHECK(m.has_dimensions());
  CHECK(hva_composite(m) == doctest::Approx((4 + 4 + 3 + 5 + 4 + 5 + 3 + 5 + 2 + 2 + 1 + 2 + 2 + 2 + 2 + 2) / 16.0));
  CHECK(krippendorff_alpha(m) > 0.5);
  CHECK_THROWS(parse_ratings_csv("item,annotator,overall\nd1,a,9\n"));
}

TEST_CASE("money is exact") {
  CHECK(Money::parse("0.04").micros() == 40'000);
  CHECK(Money::parse("$1,920").format(0, true) == "1,920");
  CHECK(Money::parse("19.2").format(2) == "19.20");
  CHECK(Money::parse("0.0405").format(3) == "0.041");
  CHECK(Money::parse("0.48").to_string() == "0.48");
  CHECK_THROWS_AS(Money::parse("abc"), ParseError);
  CHECK_THROWS_AS(Money::parse("0.0000001"), ParseError);
}

TEST_CASE("cost scenarios") {
  CostScenario s;
  s.per_image = Money::parse("0.04");
  auto c = effective_cost(s);
  CHECK(c.per_deck == Money::parse("0.48"));
  CHECK(c.per_teacher_year == Money::parse("19.20"));
  CHECK(c.per_school_year == Money::parse("960"));
  s.per_image = Money::parse("0.08");
  c = effective_cost(s);
  CHECK(c.per_deck == Money::parse("0.96"));
  CHECK(c.per_teacher_year == Money::parse("38.40"));
  CHECK(c.per_school_year == Money::parse("1920"));

  CHECK(std::abs(retry_multiplier(0.3, RetryModel::geometric) - 1.0 / 0.7) < 1e-9);
  CHECK(retry_multiplier(0.3, RetryModel::single_retry) == doctest::Approx(1.3));
  s.regen_rate = 1.0;
  CHECK_THROWS_AS(effective_cost(s), ValidationError);
}

TEST_CASE("bbox iou") {
  CHECK(bbox_iou(Box{0, 0, 10, 10}, Box{0, 0, 10, 10}) == 1.0);
  CHECK(bbox_iou(Box{0, 0, 10, 10}, Box{4, 0, 10, 10}) == doctest::Approx(0.6 / 1.4));
  CHECK(bbox_iou(Box{0, 0, 10, 10}, Box{20, 0, 10, 10}) == 0.0);
  CHECK_THROWS_AS(bbox_iou(Box{0, 0, 0, 10}, Box{0, 0, 1, 1}), ValidationError);
}

TEST_CASE("glyph ocr and json ocr output") {
  imaging::RasterImage img(160, 80);
  imaging::draw_label_plate(img, 90, 10, "b");
  imaging::draw_label_plate(img, 10, 10, "a");
  imaging::draw_label_plate(img, 10, 50, "c");
  const auto r = GlyphOcr().recognize(img);
  CHECK(r.concatenated_text() == "a b c");
  const auto j = ocr_result_from_json(R"({"tokens":[{"text":"x","bbox":[1,2,3,4]}]})");
  REQUIRE(j.tokens.size() == 1);
  CHECK(j.tokens[0].bbox == imaging::PixelRect{1, 2, 3, 4});
  CHECK_THROWS(ocr_result_from_json("[]"));
}

TEST_CASE("pair verification") {
  synth::RenderOutput prog;
  prog.image = imaging::RasterImage(240, 100);
  prog.regions.push_back({"aorta", imaging::draw_label_plate(prog.image, 20, 20, "aorta")});
  prog.regions.push_back({"vein", imaging::draw_label_plate(prog.image, 20, 60, "vein")});
  const GlyphOcr ocr;

  const auto same = verify_pair(prog, prog.image, ocr);
  CHECK(same.labels_preserved);
  CHECK(same.topology_ok);
  CHECK(same.min_iou == 1.0);
  CHECK(same.overall() == PairOverall::pending);

  auto erased = prog.image;
  const auto r = prog.regions[0].bbox;
  erased.fill_rect(r.x, r.y, r.width, r.height, imaging::kWhite);
  const auto e = verify_pair(prog, erased, ocr);
  CHECK_FALSE(e.labels_preserved);
  CHECK(e.missing_labels == std::vector<std::string>{"aorta"});
  CHECK(e.overall() == PairOverall::rejected);

  imaging::RasterImage moved(240, 100);
  const int shift = r.width * 2 / 5;
  imaging::draw_label_plate(moved, 20 + shift, 20, "aorta");
  imaging::draw_label_plate(moved, 20, 60, "vein");
  const auto m = verify_pair(prog, moved, ocr, 0.5);
  CHECK(m.labels_preserved);
  CHECK_FALSE(m.topology_ok);
  CHECK(m.min_iou == doctest::Approx(0.6 / 1.4));

  const auto round = pair_verification_from_json(to_json(m));
  CHECK(round.min_iou == m.min_iou);
  CHECK(round.missing_labels == m.missing_labels);
}
