#pragma once

#include <vector>

namespace cage::metrics {

// Minimum-cost assignment of rows to distinct columns (Hungarian method).
// Requires rows <= cols. Returns the column chosen for each row.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace cage::metrics
