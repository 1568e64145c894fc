// Command-line entry point.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "cage/benchmark/manifest.hpp"
#include "cage/benchmark/reference_set.hpp"
#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/harness/config.hpp"
#include "cage/harness/evaluate.hpp"
#include "cage/harness/pipeline.hpp"
#include "cage/harness/report.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/metrics/agreement.hpp"
#include "cage/metrics/cost.hpp"
#include "cage/metrics/fid.hpp"
#include "cage/metrics/pairs.hpp"
#include "cage/review/queue.hpp"
#include "cage/review/server.hpp"
#include "cage/synth/svg_renderer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cage;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

harness::PipelineConfig resolve_config(const Globals& g) {
  json doc;
  fs::path base = fs::current_path();
  if (g.config.empty()) {
    doc = harness::mock_config_json();
  } else {
    const json loaded = json::parse(codec::read_text_file(g.config), nullptr, false);
    if (loaded.is_discarded()) throw ConfigError(g.config + " is not valid JSON");
    doc = loaded;
    base = fs::absolute(g.config).parent_path();
  }
  if (g.seed) doc["seed"] = *g.seed;
  if (g.jobs) doc["jobs"] = *g.jobs;
  return harness::parse_config(doc, base);
}

std::vector<imaging::RasterImage> read_png_dir(const fs::path& dir) {
  const auto set = benchmark::load_reference_set(dir);
  std::vector<imaging::RasterImage> out;
  for (const auto& e : set.entries) out.push_back(imaging::read_png(e.path));
  return out;
}

review::ReviewQueue open_queue(const harness::PipelineConfig& cfg, const harness::Backends& backends) {
  auto ocr = backends.ocr;
  const double iou = cfg.review.iou_threshold;
  auto reverify = [ocr, iou](const review::CandidateItem& item, const imaging::RasterImage& replacement) {
    synth::RenderOutput prog;
    prog.image = imaging::read_png(item.prog_path);
    prog.regions = item.prog_regions;
    return metrics::verify_pair(prog, replacement, *ocr, iou);
  };
  return review::ReviewQueue(cfg.review.queue_dir, cfg.review.pairs_store,
                             std::chrono::seconds(cfg.review.lease_seconds), nullptr, reverify);
}

review::ReviewServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-preserving educational diagram generation and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON); defaults to the built-in mock setup");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--jobs", g.jobs, "Override the worker count")->check(CLI::PositiveNumber);

  std::function<int()> action;

  // bench validate
  auto* bench = app.add_subcommand("bench", "Benchmark manifest tools");
  bench->require_subcommand(1);
  auto* validate = bench->add_subcommand("validate", "Validate a prompt manifest");
  std::string manifest_path;
  bool no_strata = false;
  validate->add_option("manifest", manifest_path, "JSONL manifest")->required();
  validate->add_flag("--no-strata", no_strata, "Skip the per-subject count check");
  validate->callback([&] {
    action = [&] {
      const auto prompts = benchmark::load_manifest(manifest_path);
      const auto v = benchmark::validate_manifest(
          prompts, no_strata ? std::nullopt : std::optional<benchmark::Strata>(benchmark::reference_strata()));
      json counts = json::object();
      for (const auto& [s, n] : v.counts) counts[std::string(benchmark::to_string(s))] = n;
      std::cout << json{{"pass", v.pass},
                        {"prompts", prompts.size()},
                        {"counts", counts},
                        {"duplicate_ids", v.duplicate_ids},
                        {"empty_labels", v.empty_labels},
                        {"duplicate_labels", v.duplicate_labels},
                        {"strata_mismatches", v.strata_mismatches},
                        {"errors", v.errors}}
                       .dump(2)
                << "\n";
      return v.pass ? 0 : 1;
    };
  });

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "Run the generation pipeline");
  pipeline->require_subcommand(1);
  auto* run_cmd = pipeline->add_subcommand("run", "Synthesize and refine every prompt of a manifest");
  std::string run_manifest, run_id;
  bool overwrite = false;
  run_cmd->add_option("--manifest", run_manifest, "JSONL manifest (defaults to the config's manifest)");
  run_cmd->add_option("--run-id", run_id, "Run directory name");
  run_cmd->add_flag("--overwrite", overwrite, "Replace an existing run directory with the same id");
  run_cmd->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      fs::path mpath = run_manifest.empty() ? cfg.manifest.value_or(fs::path()) : fs::path(run_manifest);
      if (mpath.empty()) throw ConfigError("no manifest given (--manifest or config \"manifest\")");
      const auto prompts = benchmark::load_manifest(mpath);
      const auto run = harness::run_pipeline(prompts, backends, cfg, {run_id, overwrite});
      std::cout << json{{"run_id", run.id},
                        {"dir", run.dir.string()},
                        {"succeeded", run.succeeded()},
                        {"failed", run.prompts.size() - run.succeeded()}}
                       .dump(2)
                << "\n";
      return run.succeeded() > 0 ? 0 : 1;
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Compute LEM, CER and FID for a run");
  std::string eval_run, eval_reference, eval_ratings, paradigm = "cage", model = "CAGE", alpha_metric = "ordinal";
  eval->add_option("run", eval_run, "Run directory")->required();
  eval->add_option("--reference", eval_reference, "Reference image directory (defaults to the config's)");
  eval->add_option("--ratings", eval_ratings, "HVA ratings CSV");
  eval->add_option("--paradigm", paradigm, "Paradigm key for the report row");
  eval->add_option("--model", model, "Model name for the report row");
  eval->add_option("--alpha-metric", alpha_metric, "ordinal or interval")->check(CLI::IsMember({"ordinal", "interval"}));
  eval->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      const auto run = harness::load_run(eval_run);
      std::optional<benchmark::ReferenceSet> ref;
      if (!eval_reference.empty()) {
        ref = benchmark::load_reference_set(eval_reference);
      } else if (cfg.reference_dir) {
        ref = benchmark::load_reference_set(*cfg.reference_dir);
      }
      harness::EvalOptions opts;
      opts.cer_matching = cfg.cer_matching;
      opts.paradigm = paradigm;
      opts.model = model;
      opts.alpha_metric = metrics::parse_alpha_metric(alpha_metric);
      if (!eval_ratings.empty()) opts.ratings = metrics::parse_ratings_csv(codec::read_text_file(eval_ratings));
      const auto report = harness::evaluate_run(run, ref ? &*ref : nullptr, *backends.ocr, *backends.embedder, opts);
      std::cout << harness::render_report({report}, harness::ReportLayout::accuracy_table);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    };
  });

  // fid
  auto* fid_cmd = app.add_subcommand("fid", "FID between two directories of PNG images");
  std::string fid_a, fid_b;
  fid_cmd->add_option("a", fid_a, "First image directory")->required();
  fid_cmd->add_option("b", fid_b, "Second image directory")->required();
  fid_cmd->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      const auto a = read_png_dir(fid_a);
      const auto b = read_png_dir(fid_b);
      const double v = metrics::fid(metrics::embed_all(*backends.embedder, a), metrics::embed_all(*backends.embedder, b));
      std::printf("%.6f\n", v);
      return 0;
    };
  });

  // cost
  auto* cost = app.add_subcommand("cost", "Per-deck, per-teacher and per-school image cost");
  std::string per_image;
  metrics::CostScenario scenario;
  std::string retry = "geometric";
  cost->add_option("--per-image", per_image, "Price per image, e.g. 0.04")->required();
  cost->add_option("--diagrams-per-deck", scenario.diagrams_per_deck)->check(CLI::PositiveNumber);
  cost->add_option("--decks-per-week", scenario.decks_per_week)->check(CLI::PositiveNumber);
  cost->add_option("--weeks-per-year", scenario.weeks_per_year)->check(CLI::PositiveNumber);
  cost->add_option("--teachers", scenario.teachers)->check(CLI::PositiveNumber);
  cost->add_option("--regen-rate", scenario.regen_rate, "Fraction of images needing regeneration");
  cost->add_option("--retry-model", retry)->check(CLI::IsMember({"single-retry", "geometric"}));
  cost->callback([&] {
    action = [&] {
      scenario.per_image = metrics::Money::parse(per_image);
      scenario.retry_model = metrics::parse_retry_model(retry);
      const auto c = metrics::effective_cost(scenario);
      std::cout << json{{"multiplier", c.multiplier},
                        {"per_image_eff", c.per_image_eff.to_string()},
                        {"per_deck", c.per_deck.to_string()},
                        {"per_teacher_year", c.per_teacher_year.to_string()},
                        {"per_school_year", c.per_school_year.to_string()}}
                       .dump(2)
                << "\n";
      return 0;
    };
  });

  // pairs verify
  auto* pairs = app.add_subcommand("pairs", "Paired-dataset tools");
  pairs->require_subcommand(1);
  auto* verify = pairs->add_subcommand("verify", "Check label preservation and placement for a pair");
  std::string prog_png, styled_png, regions_path;
  double iou = metrics::kDefaultIouThreshold;
  verify->add_option("prog", prog_png, "Programmatic rendering (PNG)")->required();
  verify->add_option("styled", styled_png, "Stylized candidate (PNG)")->required();
  verify->add_option("--regions", regions_path, "regions.json of the programmatic rendering");
  verify->add_option("--iou", iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  verify->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      synth::RenderOutput prog;
      prog.image = imaging::read_png(prog_png);
      if (!regions_path.empty()) {
        prog.regions = synth::regions_from_json(json::parse(codec::read_text_file(regions_path)));
      }
      const auto v = metrics::verify_pair(prog, imaging::read_png(styled_png), *backends.ocr, iou);
      std::cout << metrics::to_json(v).dump(2) << "\n";
      return v.labels_preserved && v.topology_ok ? 0 : 1;
    };
  });

  // report
  auto* report = app.add_subcommand("report", "Render stored metric reports as a Markdown table");
  std::string reports_path, layout = "accuracy-table";
  harness::CostTableOptions cost_opts;
  std::string report_retry = "geometric";
  report->add_option("reports", reports_path, "JSON file with one report or an array of reports")->required();
  report->add_option("--layout", layout)->check(CLI::IsMember({"accuracy-table", "cost-table"}));
  report->add_option("--regen-low", cost_opts.regen_low, "Lower regeneration rate for the effective-cost row");
  report->add_option("--regen-high", cost_opts.regen_high, "Upper regeneration rate for the effective-cost row");
  report->add_option("--retry-model", report_retry)->check(CLI::IsMember({"single-retry", "geometric"}));
  report->callback([&] {
    action = [&] {
      cost_opts.retry_model = metrics::parse_retry_model(report_retry);
      std::cout << harness::render_report(harness::load_reports(reports_path), harness::parse_report_layout(layout),
                                          cost_opts);
      return 0;
    };
  });

  // agreement
  auto* agreement = app.add_subcommand("agreement", "Krippendorff's alpha and HVA composite from a ratings CSV");
  std::string ratings_csv, agreement_metric = "ordinal";
  agreement->add_option("ratings", ratings_csv, "Long-format ratings CSV")->required();
  agreement->add_option("--metric", agreement_metric)->check(CLI::IsMember({"ordinal", "interval"}));
  agreement->callback([&] {
    action = [&] {
      const auto m = metrics::parse_ratings_csv(codec::read_text_file(ratings_csv));
      json out{{"items", m.items.size()},
               {"annotators", m.annotators.size()},
               {"alpha", metrics::krippendorff_alpha(m, metrics::parse_alpha_metric(agreement_metric))},
               {"metric", agreement_metric}};
      out["hva"] = m.has_dimensions() ? json(metrics::hva_composite(m)) : json(nullptr);
      std::cout << out.dump(2) << "\n";
      return 0;
    };
  });

  // review
  auto* review_cmd = app.add_subcommand("review", "Human review queue");
  review_cmd->require_subcommand(1);
  auto* enqueue = review_cmd->add_subcommand("enqueue", "Queue stylization candidates for a run");
  std::string review_run;
  std::vector<double> strengths;
  enqueue->add_option("run", review_run, "Run directory")->required();
  enqueue->add_option("--strength", strengths, "Style strengths (defaults to the config's)");
  enqueue->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      auto queue = open_queue(cfg, backends);
      const auto s = strengths.empty() ? cfg.review.strengths : strengths;
      const auto n = review::enqueue_candidates(queue, harness::load_run(review_run), s, backends, cfg);
      std::cout << json{{"enqueued", n}, {"log", queue.log_path().string()}}.dump(2) << "\n";
      return 0;
    };
  });
  auto* regen = review_cmd->add_subcommand("regen", "Run pending regeneration jobs for a run");
  regen->add_option("run", review_run, "Run directory")->required();
  regen->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      auto queue = open_queue(cfg, backends);
      const auto n = review::process_regen_jobs(queue, harness::load_run(review_run), backends, cfg);
      std::cout << json{{"completed_jobs", n}}.dump(2) << "\n";
      return 0;
    };
  });
  auto* serve = review_cmd->add_subcommand("serve", "Serve the review API");
  std::optional<int> port;
  std::string host;
  serve->add_option("--port", port, "Listen port (defaults to the config's)");
  serve->add_option("--host", host, "Listen address (defaults to the config's)");
  serve->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto backends = harness::make_backends(cfg);
      auto queue = open_queue(cfg, backends);
      review::ReviewServer server(queue);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      const std::string h = host.empty() ? cfg.review.host : host;
      const int p = port.value_or(cfg.review.port);
      std::cerr << "review service on http://" << h << ":" << p << "\n";
      const bool ok = server.listen(h, p);
      g_server = nullptr;
      if (!ok) throw IoError("cannot listen on " + h + ":" + std::to_string(p));
      return 0;
    };
  });

  // render
  auto* render_cmd = app.add_subcommand("render", "Rasterize an SVG with the built-in renderer");
  std::string svg_in, png_out, regions_out;
  render_cmd->add_option("source", svg_in, "SVG file")->required();
  render_cmd->add_option("output", png_out, "PNG to write")->required();
  render_cmd->add_option("--regions", regions_out, "Where to write regions.json");
  render_cmd->callback([&] {
    action = [&] {
      const auto out = synth::render_svg(codec::read_text_file(svg_in));
      imaging::write_png(png_out, out.image);
      if (!regions_out.empty()) codec::write_file(regions_out, synth::regions_to_json(out.regions).dump(2) + "\n");
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return action ? action() : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
