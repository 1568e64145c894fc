#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/benchmark/reference_set.hpp"
#include "cage/harness/pipeline.hpp"
#include "cage/metrics/agreement.hpp"
#include "cage/metrics/cost.hpp"
#include "cage/metrics/embedder.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/metrics/text_metrics.hpp"

namespace cage::harness {

// Label counts behind LEM and CER, summed over images.
struct LabelTally {
  std::size_t images = 0;
  std::size_t labels = 0;
  std::size_t found = 0;
  std::size_t edit_distance = 0;
  std::size_t chars = 0;

  void add(const LabelTally& o);
  double lem_percent() const;
  double cer_percent() const;
};

// One table row. Percentages are on the 0..100 scale.
struct MetricReport {
  std::string paradigm = "cage";
  std::string model = "CAGE";
  int order = 0;  // tie-break within a paradigm before the model name
  std::optional<double> lem;
  std::optional<double> cer;
  std::optional<double> fid;
  std::optional<double> hva;
  std::optional<double> alpha;
  std::optional<metrics::Money> cost_per_image;
  std::optional<double> edge_respect;
  LabelTally tally;
  std::map<std::string, LabelTally> per_subject;
  std::size_t prompts_failed = 0;
  std::string run_id;
  nlohmann::json backends = nlohmann::json::object();
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);
std::vector<MetricReport> load_reports(const std::filesystem::path& path);  // JSON array or single object

struct EvalOptions {
  metrics::CerMatching cer_matching = metrics::CerMatching::independent;
  std::string paradigm = "cage";
  std::string model = "CAGE";
  std::optional<metrics::Money> cost_per_image = metrics::Money::from_micros(0);
  std::optional<metrics::RatingMatrix> ratings;  // fills HVA and alpha when given
  metrics::AlphaMetric alpha_metric = metrics::AlphaMetric::ordinal;
};

// OCR every refined image, micro-average LEM and CER over successful prompts,
// compute FID against the reference set when both sides have two or more
// images, and write metrics.json (run and prompt level) and report.md.
MetricReport evaluate_run(const RunRecord& run, const benchmark::ReferenceSet* reference,
                          const metrics::OcrBackend& ocr, const metrics::EmbedderBackend& embedder,
                          const EvalOptions& options = {});

}  // namespace cage::harness
