#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cage::metrics {

// Per-unit ratings, one slot per annotator; nullopt marks a missing rating.
using RatingGrid = std::vector<std::vector<std::optional<double>>>;

inline constexpr std::array<std::string_view, 4> kHvaDimensions = {
    "color_quality", "professional_appearance", "visual_engagement", "visual_hierarchy"};

// Items x annotators Likert ratings (1..5). `overall` and each entry of
// `dimensions` are items x annotators grids; `dimensions` is either empty or
// holds the four HVA sub-scores in kHvaDimensions order.
struct RatingMatrix {
  std::vector<std::string> items;
  std::vector<std::string> annotators;
  RatingGrid overall;
  std::vector<RatingGrid> dimensions;

  bool has_dimensions() const { return !dimensions.empty(); }
  // Throws ValidationError on shape errors, < 2 annotators or ratings outside 1..5.
  void validate() const;
};

// Long-format CSV with a header row. Required columns: item, annotator.
// Optional: overall and the four kHvaDimensions columns. Empty cells are
// missing ratings.
RatingMatrix parse_ratings_csv(std::string_view text);

enum class AlphaMetric { ordinal, interval };

AlphaMetric parse_alpha_metric(std::string_view name);
std::string_view to_string(AlphaMetric m);

// Coincidence-matrix alpha over units x coders. Units with fewer than two
// ratings are not pairable and are dropped. Throws ValidationError
// ("insufficient units") with fewer than two pairable units, or when the
// expected disagreement is zero.
double krippendorff_alpha(const RatingGrid& units, AlphaMetric metric = AlphaMetric::ordinal);

// Units are (item, dimension) pairs when dimension scores are present,
// otherwise items rated on `overall`.
double krippendorff_alpha(const RatingMatrix& ratings, AlphaMetric metric = AlphaMetric::ordinal);

// Mean over items of the per-item mean of every dimension rating. Throws
// ValidationError when dimension scores are absent.
double hva_composite(const RatingMatrix& ratings);

}  // namespace cage::metrics
