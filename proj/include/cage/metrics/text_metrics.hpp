#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cage/metrics/ocr.hpp"

namespace cage::metrics {

// Unit-cost edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Labels that do not occur as a folded substring of the OCR text.
std::vector<std::string> missing_labels(std::span<const std::string> labels, const OcrResult& ocr);

// Fraction of labels found. Throws ValidationError on an empty label list.
double lem(std::span<const std::string> labels, const OcrResult& ocr);

enum class CerMatching {
  independent,  // each label takes its closest candidate; candidates may be reused
  assignment,   // one-to-one minimum-cost matching of labels to candidates
};

struct CerBreakdown {
  std::vector<std::size_t> distances;  // per label, capped at the label length
  std::size_t total_distance = 0;
  std::size_t total_chars = 0;
  double value() const { return total_chars ? static_cast<double>(total_distance) / total_chars : 0.0; }
};

// Candidates are the OCR tokens and every run of 2 or 3 consecutive tokens
// joined by a space.
std::vector<std::string> cer_candidates(const OcrResult& ocr);

CerBreakdown cer_breakdown(std::span<const std::string> labels, const OcrResult& ocr,
                           CerMatching matching = CerMatching::independent);

// Sum of capped distances over the sum of label lengths. Throws
// ValidationError on an empty label list.
double cer(std::span<const std::string> labels, const OcrResult& ocr, CerMatching matching = CerMatching::independent);

}  // namespace cage::metrics
