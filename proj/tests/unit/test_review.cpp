#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/harness/config.hpp"
#include "cage/harness/pipeline.hpp"
#include "cage/benchmark/manifest.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/review/queue.hpp"
#include "cage/review/server.hpp"
#include "test_util.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a macro that clashes with it.
#include <httplib.h>

using namespace cage;
using namespace cage::review;
using nlohmann::json;

namespace {

struct World {
  testing::TempDir dir;
  std::filesystem::path prog = dir / "prog.png";
  std::filesystem::path good = dir / "good.png";
  std::filesystem::path blank = dir / "blank.png";
  imaging::PixelRect plate;

  World() {
    imaging::RasterImage img(120, 40);
    plate = imaging::draw_label_plate(img, 4, 4, "aorta");
    imaging::write_png(prog, img);
    imaging::write_png(good, img);
    imaging::write_png(blank, imaging::RasterImage(120, 40));
  }

  CandidateItem item(const std::string& id, bool labels_ok = true) const {
    CandidateItem c;
    c.pair_id = id;
    c.prompt_id = id.substr(0, id.find('~'));
    c.run_id = "run";
    c.prog_path = prog;
    c.candidate_path = labels_ok ? good : blank;
    c.prog_regions = {{"aorta", plate}};
    c.verification.labels_preserved = labels_ok;
    c.verification.topology_ok = labels_ok;
    c.verification.expected_labels = {"aorta"};
    if (!labels_ok) c.verification.missing_labels = {"aorta"};
    c.style = refine::StyleSpec::make("p", 0.4, 1);
    return c;
  }

  Reverifier reverifier() const {
    return [](const CandidateItem& item, const imaging::RasterImage& img) {
      synth::RenderOutput p;
      p.image = imaging::read_png(item.prog_path);
      p.regions = item.prog_regions;
      return metrics::verify_pair(p, img, metrics::GlyphOcr());
    };
  }
};

ReviewDecision accept(const std::string& id, const std::string& who) {
  ReviewDecision d;
  d.pair_id = id;
  d.verdict = Verdict::accept;
  d.reviewer = who;
  return d;
}

ReviewDecision reject(const std::string& id, const std::string& who, double strength = 0.3) {
  ReviewDecision d;
  d.pair_id = id;
  d.verdict = Verdict::reject;
  d.failed = {Criterion::visual};
  d.adjusted_strength = strength;
  d.reviewer = who;
  return d;
}

}  // namespace

TEST_CASE("concurrent reviewers get distinct leases") {
  World w;
  ReviewQueue q(w.dir / "log", w.dir / "pairs");
  for (int i = 0; i < 4; ++i) q.enqueue(w.item("p" + std::to_string(i)));
  std::vector<std::optional<CandidateItem>> got(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] { got[i] = q.next_candidate("r" + std::to_string(i)); });
  }
  for (auto& t : threads) t.join();
  std::set<std::string> ids;
  for (const auto& g : got) {
    REQUIRE(g.has_value());
    ids.insert(g->pair_id);
  }
  CHECK(ids.size() == 4);
  CHECK_FALSE(q.next_candidate("r4").has_value());
  CHECK(q.next_candidate("r0")->pair_id == got[0]->pair_id);
  CHECK(q.stats().leased == 4);
}

TEST_CASE("expired leases are handed out again") {
  World w;
  auto now = std::chrono::system_clock::time_point(std::chrono::hours(1000));
  ReviewQueue q(w.dir / "log", w.dir / "pairs", std::chrono::seconds(60), [&] { return now; });
  q.enqueue(w.item("a"));
  CHECK(q.next_candidate("alice")->pair_id == "a");
  CHECK_FALSE(q.next_candidate("bob").has_value());
  now += std::chrono::seconds(61);
  CHECK(q.next_candidate("bob")->pair_id == "a");
  CHECK_THROWS_AS(q.submit_decision(accept("a", "alice")), LeaseError);
  CHECK_FALSE(q.submit_decision(accept("a", "bob")).has_value());
  CHECK_THROWS_AS(q.submit_decision(accept("a", "bob")), ConflictError);
  CHECK_THROWS_AS(q.submit_decision(accept("nope", "bob")), NotFoundError);
  CHECK_THROWS_AS(q.enqueue(w.item("a")), ConflictError);
}

TEST_CASE("first-attempt pass rate, regeneration jobs and replay") {
  World w;
  {
    ReviewQueue q(w.dir / "log", w.dir / "pairs");
    CHECK_FALSE(q.stats().first_attempt_pass_rate.has_value());
    for (int i = 0; i < 100; ++i) q.enqueue(w.item("p" + std::to_string(i)));
    for (int i = 0; i < 100; ++i) {
      const auto c = q.next_candidate("rev");
      REQUIRE(c);
      if (i < 68) {
        CHECK_FALSE(q.submit_decision(accept(c->pair_id, "rev")).has_value());
      } else {
        const auto job = q.submit_decision(reject(c->pair_id, "rev"));
        REQUIRE(job.has_value());
        CHECK(job->strength == doctest::Approx(0.3));
        CHECK(job->attempt == 2);
      }
    }
    const auto s = q.stats();
    REQUIRE(s.first_attempt_pass_rate.has_value());
    CHECK(*s.first_attempt_pass_rate == doctest::Approx(0.68).epsilon(1e-12));
    CHECK(s.accepted == 68);
    CHECK(s.regen_pending == 32);

    auto regen = w.item("p99~retry");
    regen.attempt = 2;
    regen.parent_pair = "p99";
    q.complete_job(q.jobs().back().job_id, regen);
    const auto c = q.next_candidate("rev");
    REQUIRE(c);
    CHECK(c->pair_id == "p99~retry");
    q.submit_decision(accept(c->pair_id, "rev"));
    CHECK(*q.stats().first_attempt_pass_rate == doctest::Approx(0.68).epsilon(1e-12));
  }
  ReviewQueue replayed(w.dir / "log", w.dir / "pairs");
  const auto s = replayed.stats();
  CHECK(s.accepted == 69);
  CHECK(s.rejected == 32);
  CHECK(s.regen_pending == 31);
  CHECK(*s.first_attempt_pass_rate == doctest::Approx(0.68).epsilon(1e-12));

  const auto manifest = codec::read_text_file((w.dir / "pairs" / "manifest.jsonl").string());
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 69);
  CHECK(std::filesystem::exists(w.dir / "pairs" / "p0" / "prog.png"));
  CHECK(std::filesystem::exists(w.dir / "pairs" / "p0" / "verification.json"));
}

TEST_CASE("label failures block acceptance unless a corrected image passes") {
  World w;
  ReviewQueue q(w.dir / "log", w.dir / "pairs", std::chrono::minutes(10), nullptr, w.reverifier());
  q.enqueue(w.item("bad", false));
  q.enqueue(w.item("bad2", false));
  REQUIRE(q.next_candidate("r")->pair_id == "bad");
  CHECK(q.find("bad")->review_blocked());
  CHECK_THROWS_AS(q.submit_decision(accept("bad", "r")), ValidationError);
  auto with_blank = accept("bad", "r");
  with_blank.replacement = w.blank;
  CHECK_THROWS_AS(q.submit_decision(with_blank), ValidationError);
  auto fixed = accept("bad", "r");
  fixed.replacement = w.good;
  q.submit_decision(fixed);
  CHECK(q.state("bad") == ItemState::accepted);

  REQUIRE(q.next_candidate("r")->pair_id == "bad2");
  ReviewDecision no_criteria = reject("bad2", "r");
  no_criteria.failed.clear();
  CHECK_THROWS_AS(q.submit_decision(no_criteria), ValidationError);
}

TEST_CASE("candidates from a run and regeneration") {
  testing::TempDir dir;
  auto doc = harness::mock_config_json();
  doc["runs_dir"] = (dir / "runs").string();
  doc["review"] = {{"queue_dir", (dir / "q").string()}, {"pairs_store", (dir / "pairs").string()}};
  const auto cfg = harness::parse_config(doc, dir.path());
  const auto backends = harness::make_backends(cfg);
  auto prompts = benchmark::load_manifest(testing::fixture("manifest10.jsonl"));
  prompts.resize(2);
  const auto run = harness::run_pipeline(prompts, backends, cfg, {"r", false});

  ReviewQueue q(cfg.review.queue_dir, cfg.review.pairs_store);
  CHECK(enqueue_candidates(q, run, cfg.review.strengths, backends, cfg) == 4);
  CHECK(enqueue_candidates(q, run, cfg.review.strengths, backends, cfg) == 0);
  for (const auto& item : q.items()) {
    CHECK(item.verification.labels_preserved);
    CHECK(std::filesystem::exists(item.candidate_path));
  }
  const auto c = q.next_candidate("r");
  REQUIRE(c);
  q.submit_decision(reject(c->pair_id, "r", 0.25));
  CHECK(process_regen_jobs(q, run, backends, cfg) == 1);
  CHECK(q.stats().regen_pending == 0);
  CHECK(q.items().size() == 5);
  CHECK(q.items().back().attempt == 2);
  CHECK(q.items().back().style.strength == doctest::Approx(0.25));
}

TEST_CASE("http api") {
  World w;
  ReviewQueue q(w.dir / "log", w.dir / "pairs");
  ReviewServer server(q);
  const int port = server.bind_any("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  CHECK(c.Get("/healthz")->status == 200);
  CHECK(c.Get("/queue/next", {{"X-Reviewer-Id", "a"}})->status == 204);
  CHECK(c.Get("/queue/next")->status == 400);
  q.enqueue(w.item("x"));
  q.enqueue(w.item("y"));

  auto next = c.Get("/queue/next", {{"X-Reviewer-Id", "a"}});
  REQUIRE(next->status == 200);
  const auto item = json::parse(next->body);
  CHECK(item.at("pair_id") == "x");
  CHECK(item.contains("lease_expires_ms"));

  CHECK(c.Get("/pair/x")->status == 200);
  CHECK(c.Get("/pair/x/prog.png")->body.size() > 8);
  CHECK(c.Get("/pair/zzz")->status == 404);

  const json bad_lease{{"pair_id", "y"}, {"verdict", "accept"}};
  CHECK(c.Post("/decision", {{"X-Reviewer-Id", "a"}}, bad_lease.dump(), "application/json")->status == 409);
  CHECK(c.Post("/decision", {{"X-Reviewer-Id", "a"}}, "nope", "application/json")->status == 400);

  const json ok{{"pair_id", "x"}, {"verdict", "reject"}, {"failed_criteria", {"visual"}}, {"adjusted_strength", 0.5}};
  const auto res = c.Post("/decision", {{"X-Reviewer-Id", "a"}}, ok.dump(), "application/json");
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body).at("job").at("strength") == 0.5);
  CHECK(c.Post("/decision", {{"X-Reviewer-Id", "a"}}, ok.dump(), "application/json")->status == 409);

  const auto stats = json::parse(c.Get("/stats")->body);
  CHECK(stats.at("rejected") == 1);
  CHECK(json::parse(c.Get("/jobs")->body).at("jobs").size() == 1);

  server.stop();
  t.join();
}
