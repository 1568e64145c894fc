// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <Eigen/Dense>
#include <chrono>
#include <cstdio>
#include <functional>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "cage/benchmark/manifest.hpp"
#include "cage/codec.hpp"
#include "cage/harness/config.hpp"
#include "cage/harness/evaluate.hpp"
#include "cage/harness/pipeline.hpp"
#include "cage/harness/report.hpp"
#include "cage/imaging/canny.hpp"
#include "cage/imaging/compositing.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/metrics/agreement.hpp"
#include "cage/metrics/cost.hpp"
#include "cage/metrics/fid.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/metrics/pairs.hpp"
#include "cage/metrics/text_metrics.hpp"
#include "cage/refine/diffusion.hpp"
#include "cage/review/queue.hpp"
#include "cage/synth/llm.hpp"
#include "cage/synth/renderer.hpp"
#include "cage/synth/repair.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cage;
using nlohmann::json;

namespace {

// Collects failed expectations for one criterion.
class Expect {
 public:
  void that(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(12);
      s << what << ": got " << got << ", want " << want << " +/- " << tol;
      failures_.push_back(s.str());
    }
  }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

// ---- 1. cost model
void cost_model(Expect& e) {
  using metrics::Money;
  struct Column {
    const char* price;
    const char* deck;
    const char* teacher;
    const char* school;
  };
  for (const Column c : {Column{"0.04", "0.48", "19.20", "960"}, Column{"0.08", "0.96", "38.40", "1920"}}) {
    metrics::CostScenario s;
    s.per_image = Money::parse(c.price);
    const auto b = metrics::effective_cost(s);
    e.that(b.per_deck == Money::parse(c.deck), std::string("per deck at ") + c.price + " = " + b.per_deck.to_string());
    e.that(b.per_teacher_year == Money::parse(c.teacher),
           std::string("teacher/yr at ") + c.price + " = " + b.per_teacher_year.to_string());
    e.that(b.per_school_year == Money::parse(c.school),
           std::string("school/yr at ") + c.price + " = " + b.per_school_year.to_string());
  }
  const double m = metrics::retry_multiplier(0.30, metrics::RetryModel::geometric);
  e.near(m, 1.0 / 0.7, 1e-9, "geometric multiplier at r=0.30");
  e.that(m >= 1.3 && m <= 1.6, "multiplier inside [1.3, 1.6]");
}

// ---- 2. FID
metrics::FeatureSet moments_1d(std::size_t n, double mean, double var, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = nd(rng);
  x.array() -= x.mean();
  x *= std::sqrt(var / (x.squaredNorm() / static_cast<double>(n - 1)));
  x.array() += mean;
  return metrics::FeatureSet(x);
}

void fid(Expect& e) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(64, 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  const metrics::FeatureSet same(x);
  e.that(metrics::fid(same, same) <= 1e-6, "identical sets");
  e.near(metrics::fid(moments_1d(500, 0, 1, 1), moments_1d(500, 3, 1, 2)), 9.0, 1e-6, "mean shift 3");
  e.near(metrics::fid(moments_1d(500, 0, 4, 3), moments_1d(500, 0, 1, 4)), 1.0, 1e-6, "variance 4 vs 1");

  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + (t * 37) % 64;
    const int rank = t % 4 == 0 ? std::max(1, n / 3) : n;
    Eigen::MatrixXd a(n, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    const Eigen::MatrixXd m = a * a.transpose();
    const Eigen::MatrixXd s = metrics::matrix_sqrt_psd(m);
    worst = std::max(worst, (s * s - m).norm() / m.norm());
  }
  e.that(worst < 1e-8, "matrix_sqrt_psd worst relative error " + std::to_string(worst));
}

// ---- 3. text metrics
void text_metrics(Expect& e) {
  std::mt19937 rng(99);
  const std::vector<std::string> alphabet{"a", "b", "c", "e", "é", "ü", "ß", "ω"};
  std::uniform_int_distribution<std::size_t> len(0, 15), pick(0, alphabet.size() - 1);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string a, b;
    for (auto n = len(rng); n > 0; --n) a += alphabet[pick(rng)];
    for (auto n = len(rng); n > 0; --n) b += alphabet[pick(rng)];
    if (metrics::levenshtein(a, b) != oracle::levenshtein(a, b)) ++mismatches;
  }
  e.that(mismatches == 0, std::to_string(mismatches) + " of 1000 random pairs disagree with the oracle");

  metrics::OcrResult arota;
  arota.tokens.push_back({"arota", {}});
  const std::vector<std::string> aorta{"aorta"};
  e.near(metrics::cer(aorta, arota), 0.4, 1e-12, "CER aorta/arota");
  e.that(metrics::levenshtein("mitochondria", "mitochndira") == 3, "mitochondria/mitochndira distance 3");

  const std::vector<std::string> digestive{"mouth",    "esophagus",       "stomach",         "liver", "gallbladder",
                                           "pancreas", "small intestine", "large intestine", "rectum"};
  metrics::OcrResult ocr;
  for (const auto& l : digestive) {
    if (l != "rectum") ocr.tokens.push_back({l, {}});
  }
  e.near(metrics::lem(digestive, ocr), 8.0 / 9.0, 1e-12, "LEM without rectum");
}

// ---- 4. Canny
void canny(Expect& e) {
  e.that(imaging::canny(imaging::GrayImage(40, 30, 128.0)).count() == 0, "constant image has no edges");

  imaging::GrayImage step(40, 30, 0.0);
  for (int y = 0; y < 30; ++y) {
    for (int x = 20; x < 40; ++x) step.at(x, y) = 255.0;
  }
  const auto se = imaging::canny(step);
  for (int y = 0; y < 30; ++y) {
    int n = 0;
    bool near = true;
    for (int x = 0; x < 40; ++x) {
      if (!se.at(x, y)) continue;
      ++n;
      near = near && std::abs(x - 20) <= 1;
    }
    e.that(n == 1 && near, "step row " + std::to_string(y) + " has " + std::to_string(n) + " edge pixels");
  }

  imaging::GrayImage rect(48, 40, 20.0);
  for (int y = 10; y < 30; ++y) {
    for (int x = 12; x < 36; ++x) rect.at(x, y) = 200.0;
  }
  const auto got = imaging::canny(rect);
  const auto want = oracle::canny(rect, {});
  std::size_t diff = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 48; ++x) diff += got.at(x, y) != want.at(x, y);
  }
  e.that(want.count() > 0 && diff == 0, "rectangle differs from the reference at " + std::to_string(diff) + " pixels");
}

// ---- 5. end-to-end label preservation
void end_to_end(Expect& e) {
  testing::TempDir dir;
  const auto prompts = benchmark::load_manifest(testing::fixture("manifest10.jsonl"));
  e.that(prompts.size() == 10, "fixture has 10 prompts");

  auto doc = harness::mock_config_json();
  doc["runs_dir"] = (dir / "runs").string();
  doc["composite"] = "pixel-copy";
  const auto cfg = harness::parse_config(doc, dir.path());
  auto backends = harness::make_backends(cfg);
  std::map<std::string, std::vector<std::string>> scripts;
  for (const auto& p : prompts) scripts[p.id] = {synth::template_svg(p.labels)};
  backends.llm = std::make_shared<synth::ScriptedLlm>(scripts);
  backends.diffusion = std::make_shared<refine::RecolorDiffusion>();
  backends.ocr = std::make_shared<metrics::GlyphOcr>();

  const auto run = harness::run_pipeline(prompts, backends, cfg, {"acceptance", false});
  e.that(run.succeeded() == 10, std::to_string(run.succeeded()) + " of 10 prompts succeeded");
  const auto report = harness::evaluate_run(run, nullptr, *backends.ocr, *backends.embedder);
  e.that(report.lem && *report.lem == 100.0, "run-level LEM is 100");
  e.that(report.cer && *report.cer == 0.0, "run-level CER is 0");

  for (const auto& p : run.prompts) {
    const auto prog = imaging::read_png(p.dir / "prog.png");
    const auto refined = imaging::read_png(p.dir / "refined.png");
    const auto raw = imaging::read_png(p.dir / "diffusion.png");
    const auto mask = imaging::decode_binary_png<imaging::MaskTag>(codec::read_file((p.dir / "mask.png").string()));
    e.that(mask.count() > 0, p.prompt.id + ": empty mask");
    e.that(imaging::masked_equal(prog, refined, mask), p.prompt.id + ": masked regions differ");
    // The raw backend output must actually damage the labels, or the check above proves nothing.
    e.that(!imaging::masked_equal(prog, raw, mask), p.prompt.id + ": diffusion left the labels untouched");
    e.that(!(prog == refined), p.prompt.id + ": refined image equals the programmatic one");
  }
}

// ---- 6. repair loop
void repair_loop(Expect& e) {
  testing::TempDir dir;
  const auto p = benchmark::DiagramPrompt::make("bio-cell", benchmark::Subject::biology, benchmark::GradeBand::g6_8,
                                                "cell", {"nucleus", "ribosome", "cytoplasm"}, "");
  const synth::BuiltinSvgRenderer renderer;

  const synth::ScriptedLlm two(synth::ScriptedLlm::Scripts{{p.id, {synth::template_svg({"nucleus", "ribosome"}), synth::template_svg(p.labels)}}});
  synth::RepairOptions opts;
  opts.max_attempts = 3;
  opts.attempts_dir = dir / "two";
  const auto res = synth::synthesize_with_repair(p, two, renderer, synth::RenderLanguage::svg, opts);
  e.that(res.artifact.attempt_index == 2, "converged at attempt " + std::to_string(res.artifact.attempt_index));
  e.that(res.attempts.size() == 2, "two attempts recorded");
  for (int i : {1, 2}) {
    const auto v = dir / "two" / ("attempt-" + std::to_string(i)) / "verify.json";
    e.that(std::filesystem::exists(v), v.string() + " missing");
  }

  const synth::ScriptedLlm never(synth::ScriptedLlm::Scripts{{p.id, {synth::template_svg({"nucleus"})}}});
  opts.attempts_dir = dir / "never";
  opts.max_attempts = 4;
  bool exhausted = false;
  try {
    synth::synthesize_with_repair(p, never, renderer, synth::RenderLanguage::svg, opts);
  } catch (const synth::RepairExhausted& x) {
    exhausted = x.attempts().size() == 4;
  }
  e.that(exhausted, "never-passing script exhausts after 4 attempts");
  e.that(never.calls(p.id) == 4, "LLM called once per attempt");
  for (int i = 1; i <= 4; ++i) {
    const auto a = dir / "never" / ("attempt-" + std::to_string(i));
    e.that(std::filesystem::exists(a / "code.svg") && std::filesystem::exists(a / "verify.json"),
           a.string() + " not persisted");
  }
  e.that(!std::filesystem::exists(dir / "never" / "attempt-5"), "no attempt beyond the limit");
}

// ---- 7. Krippendorff's alpha
void agreement(Expect& e) {
  const metrics::RatingGrid perfect{{4, 4, 4}, {2, 2, 2}, {5, 5, 5}, {1, 1, std::nullopt}};
  e.near(metrics::krippendorff_alpha(perfect, metrics::AlphaMetric::ordinal), 1.0, 1e-12, "perfect agreement");
  const metrics::RatingGrid fixture{{1, 1}, {2, 2}, {3, 3}, {4, 5}};
  e.near(metrics::krippendorff_alpha(fixture, metrics::AlphaMetric::interval), 104.0 / 111.0, 1e-9,
         "interval fixture");

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> score(1, 5);
  metrics::RatingGrid g(30, std::vector<std::optional<double>>(6));
  for (auto& u : g) {
    for (auto& v : u) v = score(rng);
  }
  const double base = metrics::krippendorff_alpha(g);
  std::vector<int> perm{0, 1, 2, 3, 4, 5};
  for (int t = 0; t < 10; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    auto p = g;
    for (std::size_t u = 0; u < g.size(); ++u) {
      for (std::size_t k = 0; k < perm.size(); ++k) p[u][k] = g[u][perm[k]];
    }
    e.near(metrics::krippendorff_alpha(p), base, 1e-12, "permuted annotator columns");
  }
}

// ---- 8. report goldens
void report_goldens(Expect& e) {
  const auto t1 = harness::render_report(harness::load_reports(testing::fixture("table1_reports.json")),
                                         harness::ReportLayout::accuracy_table);
  e.that(t1 == codec::read_text_file(testing::fixture("table1.md").string()), "accuracy table differs:\n" + t1);
  const auto t2 = harness::render_report(harness::load_reports(testing::fixture("table2_reports.json")),
                                         harness::ReportLayout::cost_table);
  e.that(t2 == codec::read_text_file(testing::fixture("table2.md").string()), "cost table differs:\n" + t2);
}

// ---- 9. pair verification
void pair_verification(Expect& e) {
  synth::RenderOutput prog;
  prog.image = imaging::RasterImage(260, 100);
  prog.regions.push_back({"aorta", imaging::draw_label_plate(prog.image, 20, 20, "aorta")});
  prog.regions.push_back({"pulmonary vein", imaging::draw_label_plate(prog.image, 20, 60, "pulmonary vein")});
  const metrics::GlyphOcr ocr;

  const auto same = metrics::verify_pair(prog, prog.image, ocr, 0.5);
  e.that(same.labels_preserved && same.topology_ok, "identity pair passes both criteria");

  auto erased = prog.image;
  const auto box = prog.regions[0].bbox;
  erased.fill_rect(box.x, box.y, box.width, box.height, imaging::kWhite);
  const auto er = metrics::verify_pair(prog, erased, ocr, 0.5);
  e.that(!er.labels_preserved && er.missing_labels == std::vector<std::string>{"aorta"}, "erased label fails (1)");

  imaging::RasterImage moved(260, 100);
  imaging::draw_label_plate(moved, 20 + box.width * 2 / 5, 20, "aorta");
  imaging::draw_label_plate(moved, 20, 60, "pulmonary vein");
  const auto mv = metrics::verify_pair(prog, moved, ocr, 0.5);
  e.that(mv.labels_preserved, "translated label is still readable");
  e.that(!mv.topology_ok, "translated label fails (2)");
  e.near(mv.min_iou, 0.6 / 1.4, 1e-12, "IoU of a 40% translation");
}

// ---- 10. review queue
void review_queue(Expect& e) {
  testing::TempDir dir;
  imaging::RasterImage img(80, 30);
  const auto plate = imaging::draw_label_plate(img, 2, 2, "lens");
  imaging::write_png(dir / "p.png", img);
  auto item = [&](const std::string& id) {
    review::CandidateItem c;
    c.pair_id = id;
    c.prompt_id = id;
    c.run_id = "run";
    c.prog_path = dir / "p.png";
    c.candidate_path = dir / "p.png";
    c.prog_regions = {{"lens", plate}};
    c.verification.labels_preserved = true;
    c.verification.topology_ok = true;
    c.style = refine::StyleSpec::make("p", 0.4, 1);
    return c;
  };

  review::ReviewQueue four(dir / "q4", dir / "pairs4");
  for (int i = 0; i < 4; ++i) four.enqueue(item("item-" + std::to_string(i)));
  std::vector<std::string> got(4);
  std::vector<std::thread> reviewers;
  for (int i = 0; i < 4; ++i) {
    reviewers.emplace_back([&, i] {
      if (auto c = four.next_candidate("reviewer-" + std::to_string(i))) got[i] = c->pair_id;
    });
  }
  for (auto& t : reviewers) t.join();
  const std::set<std::string> distinct(got.begin(), got.end());
  e.that(distinct.size() == 4 && !distinct.contains(""), "four reviewers hold four distinct leases");

  review::ReviewQueue q(dir / "q100", dir / "pairs100");
  for (int i = 0; i < 100; ++i) q.enqueue(item("pair-" + std::to_string(i)));
  for (int i = 0; i < 100; ++i) {
    const auto c = q.next_candidate("r");
    if (!c) break;
    review::ReviewDecision d;
    d.pair_id = c->pair_id;
    d.reviewer = "r";
    if (i < 68) {
      d.verdict = review::Verdict::accept;
    } else {
      d.verdict = review::Verdict::reject;
      d.failed = {review::Criterion::visual};
    }
    q.submit_decision(d);
  }
  const auto s = q.stats();
  e.that(s.first_attempt_pass_rate.has_value(), "pass rate defined");
  if (s.first_attempt_pass_rate) e.near(*s.first_attempt_pass_rate, 0.68, 1e-12, "first-attempt pass rate");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Expect&)>>> criteria{
      {"cost model", cost_model},
      {"FID", fid},
      {"text metrics", text_metrics},
      {"Canny", canny},
      {"end-to-end label preservation", end_to_end},
      {"repair loop", repair_loop},
      {"Krippendorff alpha", agreement},
      {"report goldens", report_goldens},
      {"pair verification", pair_verification},
      {"review queue", review_queue},
  };
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Expect e;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(e);
    } catch (const std::exception& x) {
      e.that(false, std::string("exception: ") + x.what());
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    const bool ok = e.failures().empty();
    failed += !ok;
    std::printf("%s criterion %zu: %s (%lld ms)\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                static_cast<long long>(ms));
    for (const auto& f : e.failures()) std::printf("    %s\n", f.c_str());
  }
  const auto total =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%zu/%zu criteria passed in %lld ms\n", criteria.size() - failed, criteria.size(),
              static_cast<long long>(total));
  return failed ? 1 : 0;
}
