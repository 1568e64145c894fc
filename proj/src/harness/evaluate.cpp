#include "cage/harness/evaluate.hpp"

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/harness/report.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/metrics/fid.hpp"

namespace cage::harness {

namespace fs = std::filesystem;
using nlohmann::json;

void LabelTally::add(const LabelTally& o) {
  images += o.images;
  labels += o.labels;
  found += o.found;
  edit_distance += o.edit_distance;
  chars += o.chars;
}

double LabelTally::lem_percent() const { return labels ? 100.0 * static_cast<double>(found) / labels : 0.0; }
double LabelTally::cer_percent() const { return chars ? 100.0 * static_cast<double>(edit_distance) / chars : 0.0; }

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

json tally_json(const LabelTally& t) {
  return {{"images", t.images},       {"labels", t.labels}, {"found", t.found},
          {"edit_distance", t.edit_distance}, {"chars", t.chars},   {"lem", t.lem_percent()},
          {"cer", t.cer_percent()}};
}

LabelTally tally_from_json(const json& j) {
  LabelTally t;
  t.images = j.value("images", std::size_t{0});
  t.labels = j.value("labels", std::size_t{0});
  t.found = j.value("found", std::size_t{0});
  t.edit_distance = j.value("edit_distance", std::size_t{0});
  t.chars = j.value("chars", std::size_t{0});
  return t;
}

}  // namespace

json to_json(const MetricReport& r) {
  json subjects = json::object();
  for (const auto& [s, t] : r.per_subject) subjects[s] = tally_json(t);
  return {{"paradigm", r.paradigm},
          {"model", r.model},
          {"order", r.order},
          {"lem", optional_number(r.lem)},
          {"cer", optional_number(r.cer)},
          {"fid", optional_number(r.fid)},
          {"hva", optional_number(r.hva)},
          {"alpha", optional_number(r.alpha)},
          {"cost_per_image", r.cost_per_image ? json(r.cost_per_image->to_string()) : json(nullptr)},
          {"edge_respect", optional_number(r.edge_respect)},
          {"totals", tally_json(r.tally)},
          {"per_subject", subjects},
          {"prompts_failed", r.prompts_failed},
          {"run_id", r.run_id},
          {"backends", r.backends},
          {"warnings", r.warnings}};
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  try {
    r.paradigm = j.at("paradigm").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.order = j.value("order", 0);
    r.lem = number_or_null(j, "lem");
    r.cer = number_or_null(j, "cer");
    r.fid = number_or_null(j, "fid");
    r.hva = number_or_null(j, "hva");
    r.alpha = number_or_null(j, "alpha");
    r.edge_respect = number_or_null(j, "edge_respect");
    if (j.contains("cost_per_image") && !j["cost_per_image"].is_null()) {
      const auto& c = j["cost_per_image"];
      r.cost_per_image = metrics::Money::parse(c.is_string() ? c.get<std::string>() : c.dump());
    }
    if (j.contains("totals")) r.tally = tally_from_json(j["totals"]);
    if (j.contains("per_subject")) {
      for (const auto& [s, t] : j["per_subject"].items()) r.per_subject[s] = tally_from_json(t);
    }
    r.prompts_failed = j.value("prompts_failed", std::size_t{0});
    r.run_id = j.value("run_id", "");
    r.backends = j.value("backends", json::object());
    r.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metric report: ") + e.what());
  }
  return r;
}

std::vector<MetricReport> load_reports(const fs::path& path) {
  const json j = json::parse(codec::read_text_file(path.string()), nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + " is not valid JSON");
  std::vector<MetricReport> out;
  if (j.is_array()) {
    for (const auto& r : j) out.push_back(report_from_json(r));
  } else {
    out.push_back(report_from_json(j));
  }
  return out;
}

MetricReport evaluate_run(const RunRecord& run, const benchmark::ReferenceSet* reference,
                          const metrics::OcrBackend& ocr, const metrics::EmbedderBackend& embedder,
                          const EvalOptions& options) {
  if (run.succeeded() == 0) throw ValidationError("run " + run.id + " has no successful prompts to evaluate");
  MetricReport report;
  report.paradigm = options.paradigm;
  report.model = options.model;
  report.run_id = run.id;
  report.cost_per_image = options.cost_per_image;
  report.backends = run.backends;
  report.backends["ocr"] = ocr.name();
  report.backends["embedder"] = embedder.name();

  std::vector<imaging::RasterImage> generated;
  double respect_sum = 0;
  std::size_t respect_n = 0;
  for (const auto& p : run.prompts) {
    if (!p.ok) {
      ++report.prompts_failed;
      continue;
    }
    json pm{{"id", p.prompt.id}};
    try {
      auto image = imaging::read_png(p.dir / "refined.png");
      const auto read = ocr.recognize(image);
      const auto missing = metrics::missing_labels(p.prompt.labels, read);
      const auto cer = metrics::cer_breakdown(p.prompt.labels, read, options.cer_matching);
      LabelTally t;
      t.images = 1;
      t.labels = p.prompt.labels.size();
      t.found = t.labels - missing.size();
      t.edit_distance = cer.total_distance;
      t.chars = cer.total_chars;
      report.tally.add(t);
      report.per_subject[std::string(benchmark::to_string(p.prompt.subject))].add(t);
      pm["lem"] = 100.0 * static_cast<double>(t.found) / t.labels;
      pm["cer"] = cer.total_chars ? 100.0 * static_cast<double>(cer.total_distance) / cer.total_chars : 0.0;
      pm["missing_labels"] = missing;
      pm["label_distances"] = cer.distances;
      pm["ocr_text"] = read.concatenated_text();
      generated.push_back(std::move(image));
      if (p.edge_respect) {
        respect_sum += *p.edge_respect;
        ++respect_n;
      }
    } catch (const Error& e) {
      pm["error"] = e.what();
      report.warnings.push_back(p.prompt.id + ": " + e.what());
    }
    codec::write_file((p.dir / "metrics.json").string(), pm.dump(2) + "\n");
  }
  if (report.tally.images == 0) throw BackendError("no refined image could be evaluated");
  report.lem = report.tally.lem_percent();
  report.cer = report.tally.cer_percent();
  if (respect_n) report.edge_respect = respect_sum / static_cast<double>(respect_n);

  if (!reference) {
    report.warnings.push_back("FID skipped: no reference set");
  } else if (generated.size() < 2 || reference->size() < 2) {
    report.warnings.push_back("FID skipped: need at least 2 images on each side (generated " +
                              std::to_string(generated.size()) + ", reference " + std::to_string(reference->size()) +
                              ")");
  } else {
    std::vector<imaging::RasterImage> refs;
    for (const auto& e : reference->entries) refs.push_back(imaging::read_png(e.path));
    report.fid = metrics::fid(metrics::embed_all(embedder, generated), metrics::embed_all(embedder, refs));
  }

  if (options.ratings) {
    if (options.ratings->has_dimensions()) report.hva = metrics::hva_composite(*options.ratings);
    try {
      report.alpha = metrics::krippendorff_alpha(*options.ratings, options.alpha_metric);
    } catch (const ValidationError& e) {
      report.warnings.push_back(std::string("alpha skipped: ") + e.what());
    }
  }

  codec::write_file((run.dir / "metrics.json").string(), to_json(report).dump(2) + "\n");
  std::string md = "# Run " + run.id + "\n\n" + render_report({report}, ReportLayout::accuracy_table) + "\n" +
                   render_subject_table(report);
  if (!report.warnings.empty()) {
    md += "\nWarnings:\n\n";
    for (const auto& w : report.warnings) md += "- " + w + "\n";
  }
  codec::write_file((run.dir / "report.md").string(), md);
  return report;
}

}  // namespace cage::harness
