#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cage/harness/evaluate.hpp"
#include "cage/metrics/cost.hpp"

namespace cage::harness {

enum class ReportLayout { accuracy_table, cost_table };

ReportLayout parse_report_layout(std::string_view name);

struct CostTableOptions {
  metrics::CostScenario scenario;  // per_image is taken from each report
  // Regeneration-rate range behind the effective-cost row.
  double regen_low = 0.25;
  double regen_high = 0.375;
  metrics::RetryModel retry_model = metrics::RetryModel::geometric;
};

// Display name of a paradigm key (e.g. "open-source-diffusion").
std::string paradigm_label(std::string_view paradigm);

// Markdown table. Rows sort by paradigm (open-source diffusion, code-based,
// closed-source API, CAGE, then unknown keys alphabetically), then `order`,
// then model. The cost table has one column per report with a non-zero
// per-image cost.
std::string render_report(std::vector<MetricReport> reports, ReportLayout layout,
                          const CostTableOptions& cost = {});

// Per-subject LEM / CER breakdown for one evaluated run.
std::string render_subject_table(const MetricReport& report);

}  // namespace cage::harness
