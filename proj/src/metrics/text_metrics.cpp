#include "cage/metrics/text_metrics.hpp"

#include <algorithm>
#include <numeric>

#include "cage/error.hpp"
#include "cage/metrics/assignment.hpp"
#include "cage/text.hpp"

namespace cage::metrics {

namespace {

std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void require_labels(std::span<const std::string> labels) {
  if (labels.empty()) throw ValidationError("label list is empty");
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(text::decode_utf8(a), text::decode_utf8(b));
}

std::vector<std::string> missing_labels(std::span<const std::string> labels, const OcrResult& ocr) {
  const std::string haystack = text::fold(ocr.concatenated_text());
  std::vector<std::string> missing;
  for (const auto& label : labels) {
    if (haystack.find(text::fold(label)) == std::string::npos) missing.push_back(label);
  }
  return missing;
}

double lem(std::span<const std::string> labels, const OcrResult& ocr) {
  require_labels(labels);
  const auto missing = missing_labels(labels, ocr);
  return static_cast<double>(labels.size() - missing.size()) / static_cast<double>(labels.size());
}

std::vector<std::string> cer_candidates(const OcrResult& ocr) {
  std::vector<std::string> out;
  const auto& t = ocr.tokens;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string joined = t[i].text;
      for (std::size_t k = 1; k < n; ++k) joined += " " + t[i + k].text;
      out.push_back(std::move(joined));
    }
  }
  return out;
}

CerBreakdown cer_breakdown(std::span<const std::string> labels, const OcrResult& ocr, CerMatching matching) {
  require_labels(labels);
  std::vector<std::u32string> cands;
  for (const auto& c : cer_candidates(ocr)) cands.push_back(text::decode_utf8(text::fold(c)));

  const std::size_t n = labels.size();
  std::vector<std::u32string> folded(n);
  std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(cands.size()));
  CerBreakdown out;
  for (std::size_t i = 0; i < n; ++i) {
    folded[i] = text::decode_utf8(text::fold(labels[i]));
    out.total_chars += folded[i].size();
    for (std::size_t j = 0; j < cands.size(); ++j) {
      dist[i][j] = std::min(edit_distance(folded[i], cands[j]), folded[i].size());
    }
  }

  out.distances.assign(n, 0);
  if (matching == CerMatching::independent) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = folded[i].size();
      for (auto d : dist[i]) best = std::min(best, d);
      out.distances[i] = best;
    }
  } else {
    // Columns past the candidates are "unmatched" slots costing the full label.
    const std::size_t cols = cands.size() + n;
    std::vector<std::vector<double>> cost(n, std::vector<double>(cols));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        cost[i][j] = static_cast<double>(j < cands.size() ? dist[i][j] : folded[i].size());
      }
    }
    const auto pick = min_cost_assignment(cost);
    for (std::size_t i = 0; i < n; ++i) out.distances[i] = static_cast<std::size_t>(cost[i][pick[i]]);
  }
  for (auto d : out.distances) out.total_distance += d;
  return out;
}

double cer(std::span<const std::string> labels, const OcrResult& ocr, CerMatching matching) {
  return cer_breakdown(labels, ocr, matching).value();
}

}  // namespace cage::metrics
