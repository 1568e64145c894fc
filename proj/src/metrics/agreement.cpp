#include "cage/metrics/agreement.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "cage/error.hpp"
#include "cage/text.hpp"

namespace cage::metrics {

void RatingMatrix::validate() const {
  if (annotators.size() < 2) throw ValidationError("rating matrix needs at least 2 annotators");
  if (!dimensions.empty() && dimensions.size() != kHvaDimensions.size()) {
    throw ValidationError("rating matrix must carry all 4 dimension grids or none");
  }
  auto check = [&](const RatingGrid& g, std::string_view what) {
    if (g.size() != items.size()) throw ValidationError(std::string(what) + " grid does not match the item count");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i].size() != annotators.size()) {
        throw ValidationError(std::string(what) + " row for item " + items[i] + " does not match the annotator count");
      }
      for (const auto& r : g[i]) {
        if (r && (*r < 1 || *r > 5 || *r != static_cast<int>(*r))) {
          throw ValidationError("rating outside 1..5 for item " + items[i] + ": " + std::to_string(*r));
        }
      }
    }
  };
  if (!overall.empty()) check(overall, "overall");
  for (std::size_t d = 0; d < dimensions.size(); ++d) check(dimensions[d], kHvaDimensions[d]);
}

RatingMatrix parse_ratings_csv(std::string_view csv) {
  std::vector<std::string> lines = text::split(csv, '\n');
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> col;
  RatingMatrix m;
  std::map<std::string, std::size_t> item_index, annot_index;
  struct Cell {
    std::size_t item, annot;
    std::optional<double> overall;
    std::array<std::optional<double>, 4> dims;
  };
  std::vector<Cell> cells;
  bool have_overall = false, have_dims = false;

  auto parse_rating = [&](const std::string& s) -> std::optional<double> {
    const std::string t = text::trim(s);
    if (t.empty()) return std::nullopt;
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw ParseError("rating is not an integer: " + t, lineno);
    if (v < 1 || v > 5) throw ParseError("rating outside 1..5: " + t, lineno);
    return v;
  };

  for (auto& raw : lines) {
    ++lineno;
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    auto fields = text::split(line, ',');
    if (col.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[text::trim(fields[i])] = i;
      if (!col.contains("item") || !col.contains("annotator")) {
        throw ParseError("ratings header needs item and annotator columns", lineno);
      }
      have_overall = col.contains("overall");
      const auto n_dims = std::count_if(kHvaDimensions.begin(), kHvaDimensions.end(),
                                        [&](std::string_view d) { return col.contains(std::string(d)); });
      if (n_dims != 0 && n_dims != 4) throw ParseError("ratings header has only some dimension columns", lineno);
      have_dims = n_dims == 4;
      if (!have_overall && !have_dims) throw ParseError("ratings header has no rating columns", lineno);
      continue;
    }
    if (fields.size() != col.size()) {
      throw ParseError("expected " + std::to_string(col.size()) + " fields, got " + std::to_string(fields.size()),
                       lineno);
    }
    const std::string item = text::trim(fields[col["item"]]);
    const std::string annot = text::trim(fields[col["annotator"]]);
    if (item.empty() || annot.empty()) throw ParseError("empty item or annotator", lineno);
    auto [it, new_item] = item_index.try_emplace(item, m.items.size());
    if (new_item) m.items.push_back(item);
    auto [at, new_annot] = annot_index.try_emplace(annot, m.annotators.size());
    if (new_annot) m.annotators.push_back(annot);
    Cell c{it->second, at->second, std::nullopt, {}};
    if (have_overall) c.overall = parse_rating(fields[col["overall"]]);
    if (have_dims) {
      for (std::size_t d = 0; d < 4; ++d) c.dims[d] = parse_rating(fields[col[std::string(kHvaDimensions[d])]]);
    }
    cells.push_back(c);
  }
  if (col.empty()) throw ParseError("ratings file is empty");

  const RatingGrid blank(m.items.size(), std::vector<std::optional<double>>(m.annotators.size()));
  if (have_overall) m.overall = blank;
  if (have_dims) m.dimensions.assign(4, blank);
  std::vector<std::vector<char>> seen(m.items.size(), std::vector<char>(m.annotators.size(), 0));
  for (const auto& c : cells) {
    if (seen[c.item][c.annot]) {
      throw ValidationError("duplicate rating for item " + m.items[c.item] + " by " + m.annotators[c.annot]);
    }
    seen[c.item][c.annot] = 1;
    if (have_overall) m.overall[c.item][c.annot] = c.overall;
    for (std::size_t d = 0; have_dims && d < 4; ++d) m.dimensions[d][c.item][c.annot] = c.dims[d];
  }
  m.validate();
  return m;
}

AlphaMetric parse_alpha_metric(std::string_view name) {
  if (name == "ordinal") return AlphaMetric::ordinal;
  if (name == "interval") return AlphaMetric::interval;
  throw ConfigError("unknown alpha metric: " + std::string(name));
}

std::string_view to_string(AlphaMetric m) { return m == AlphaMetric::ordinal ? "ordinal" : "interval"; }

double krippendorff_alpha(const RatingGrid& units, AlphaMetric metric) {
  std::vector<std::vector<double>> pairable;
  std::vector<double> values;
  for (const auto& u : units) {
    std::vector<double> v;
    for (const auto& r : u) {
      if (r) v.push_back(*r);
    }
    if (v.size() < 2) continue;
    values.insert(values.end(), v.begin(), v.end());
    pairable.push_back(std::move(v));
  }
  if (pairable.size() < 2) throw ValidationError("insufficient units: need at least 2 units with 2 or more ratings");

  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t k = values.size();
  auto index_of = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), x) - values.begin());
  };

  // Coincidence matrix: each ordered pair within a unit contributes 1/(m_u - 1).
  std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
  for (const auto& u : pairable) {
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) o[index_of(u[i])][index_of(u[j])] += w;
      }
    }
  }
  std::vector<double> nc(k, 0.0);
  double n = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < k; ++j) nc[c] += o[c][j];
    n += nc[c];
  }

  auto delta2 = [&](std::size_t c, std::size_t e) {
    if (metric == AlphaMetric::interval) {
      const double d = values[c] - values[e];
      return d * d;
    }
    const auto [lo, hi] = std::minmax(c, e);
    double s = 0;
    for (std::size_t g = lo; g <= hi; ++g) s += nc[g];
    s -= (nc[lo] + nc[hi]) / 2.0;
    return s * s;
  };

  double observed = 0, expected = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t e = 0; e < k; ++e) {
      const double d = delta2(c, e);
      observed += o[c][e] * d;
      expected += nc[c] * nc[e] * d;
    }
  }
  observed /= n;
  expected /= n * (n - 1);
  if (expected == 0) throw ValidationError("insufficient variation: expected disagreement is zero");
  return 1.0 - observed / expected;
}

double krippendorff_alpha(const RatingMatrix& ratings, AlphaMetric metric) {
  ratings.validate();
  if (!ratings.has_dimensions()) return krippendorff_alpha(ratings.overall, metric);
  RatingGrid units;
  for (std::size_t i = 0; i < ratings.items.size(); ++i) {
    for (const auto& grid : ratings.dimensions) units.push_back(grid[i]);
  }
  return krippendorff_alpha(units, metric);
}

double hva_composite(const RatingMatrix& ratings) {
  ratings.validate();
  if (!ratings.has_dimensions()) throw ValidationError("HVA composite needs the four dimension scores");
  double total = 0;
  std::size_t rated_items = 0;
  for (std::size_t i = 0; i < ratings.items.size(); ++i) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& grid : ratings.dimensions) {
      for (const auto& r : grid[i]) {
        if (r) {
          sum += *r;
          ++n;
        }
      }
    }
    if (n == 0) continue;
    total += sum / static_cast<double>(n);
    ++rated_items;
  }
  if (rated_items == 0) throw ValidationError("no dimension ratings present");
  return total / static_cast<double>(rated_items);
}

}  // namespace cage::metrics
