#pragma once

// Independent reference implementations used to cross-check the library.
// They favour the most literal formulation over speed.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cage/imaging/canny.hpp"

namespace cage::oracle {

// Full-table edit distance over decoded code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Canny with a non-separable 2-D Gaussian, explicit Sobel sums and
// hysteresis by repeated sweeps until nothing changes.
imaging::EdgeMap canny(const imaging::GrayImage& gray, const imaging::CannyParams& params);

// Krippendorff's alpha from the pairwise definition: observed disagreement
// averaged over ordered within-unit pairs, expected over all ordered pairs
// of pairable values.
double krippendorff_alpha_interval(const std::vector<std::vector<std::optional<double>>>& units);
double krippendorff_alpha_ordinal(const std::vector<std::vector<std::optional<double>>>& units);

}  // namespace cage::oracle
