#include "cage/review/queue.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "cage/codec.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/refine/diffusion.hpp"
#include "cage/text.hpp"

namespace cage::review {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::labels: return "labels";
    case Criterion::topology: return "topology";
    case Criterion::visual: return "visual";
  }
  return "visual";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "labels") return Criterion::labels;
  if (s == "topology") return Criterion::topology;
  if (s == "visual") return Criterion::visual;
  throw ValidationError("unknown criterion: " + std::string(s));
}

std::string_view to_string(ItemState s) {
  switch (s) {
    case ItemState::pending: return "pending";
    case ItemState::accepted: return "accepted";
    case ItemState::rejected: return "rejected";
  }
  return "pending";
}

json to_json(const CandidateItem& item) {
  return {{"pair_id", item.pair_id},
          {"prompt_id", item.prompt_id},
          {"run_id", item.run_id},
          {"prog_path", item.prog_path.string()},
          {"candidate_path", item.candidate_path.string()},
          {"prog_regions", synth::regions_to_json(item.prog_regions)["regions"]},
          {"verification", metrics::to_json(item.verification)},
          {"style", refine::to_json(item.style)},
          {"attempt", item.attempt},
          {"parent_pair", item.parent_pair},
          {"review_blocked", item.review_blocked()},
          {"suggested_verdict", item.suggested_verdict()}};
}

CandidateItem candidate_from_json(const json& j) {
  CandidateItem item;
  try {
    item.pair_id = j.at("pair_id").get<std::string>();
    item.prompt_id = j.at("prompt_id").get<std::string>();
    item.run_id = j.value("run_id", "");
    item.prog_path = j.at("prog_path").get<std::string>();
    item.candidate_path = j.at("candidate_path").get<std::string>();
    item.prog_regions = synth::regions_from_json(json{{"regions", j.value("prog_regions", json::array())}});
    item.verification = metrics::pair_verification_from_json(j.at("verification"));
    item.style = refine::style_from_json(j.at("style"));
    item.attempt = j.value("attempt", 1);
    item.parent_pair = j.value("parent_pair", "");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed candidate item: ") + e.what());
  }
  return item;
}

json to_json(const ReviewDecision& d) {
  json failed = json::array();
  for (auto c : d.failed) failed.push_back(to_string(c));
  json j{{"pair_id", d.pair_id},
         {"verdict", d.verdict == Verdict::accept ? "accept" : "reject"},
         {"failed_criteria", failed},
         {"reviewer", d.reviewer},
         {"timestamp", d.timestamp}};
  if (d.adjusted_strength) j["adjusted_strength"] = *d.adjusted_strength;
  if (d.replacement) {
    j["manually_corrected"] = true;
    j["replacement_path"] = d.replacement->string();
  }
  return j;
}

ReviewDecision decision_from_json(const json& j) {
  ReviewDecision d;
  try {
    d.pair_id = j.at("pair_id").get<std::string>();
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict == "accept") {
      d.verdict = Verdict::accept;
    } else if (verdict == "reject") {
      d.verdict = Verdict::reject;
    } else {
      throw ValidationError("verdict must be accept or reject");
    }
    for (const auto& c : j.value("failed_criteria", json::array())) d.failed.insert(parse_criterion(c.get<std::string>()));
    if (j.contains("adjusted_strength") && !j["adjusted_strength"].is_null()) {
      d.adjusted_strength = j["adjusted_strength"].get<double>();
    }
    d.reviewer = j.value("reviewer", j.value("reviewer_id", ""));
    d.timestamp = j.value("timestamp", "");
    if (j.value("manually_corrected", false)) {
      if (!j.contains("replacement_path")) throw ValidationError("manually_corrected needs replacement_path");
      d.replacement = j["replacement_path"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed decision: ") + e.what());
  }
  return d;
}

json to_json(const RegenJob& j) {
  return {{"job_id", j.job_id},     {"source_pair", j.source_pair}, {"prompt_id", j.prompt_id},
          {"run_id", j.run_id},     {"strength", j.strength},       {"attempt", j.attempt},
          {"status", j.done ? "done" : "pending"}, {"result_pair", j.result_pair}};
}

json to_json(const QueueStats& s) {
  return {{"pending", s.pending},
          {"leased", s.leased},
          {"accepted", s.accepted},
          {"rejected", s.rejected},
          {"regen_pending", s.regen_pending},
          {"first_attempt_decided", s.first_attempt_decided},
          {"first_attempt_accepted", s.first_attempt_accepted},
          {"first_attempt_pass_rate",
           s.first_attempt_pass_rate ? json(*s.first_attempt_pass_rate) : json(nullptr)}};
}

std::string make_pair_id(const std::string& prompt_id, double strength, int attempt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "~s%.2f~a%d", strength, attempt);
  return prompt_id + buf;
}

namespace {

std::string iso_time(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[48];
  const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms % 1000));
  return buf;
}

}  // namespace

ReviewQueue::ReviewQueue(fs::path log_dir, fs::path pairs_store, std::chrono::seconds lease, Clock clock,
                         Reverifier reverify)
    : log_path_(log_dir / "events.jsonl"),
      pairs_store_(std::move(pairs_store)),
      lease_duration_(lease),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      reverify_(std::move(reverify)) {
  fs::create_directories(log_dir);
  fs::create_directories(pairs_store_);
  if (!fs::exists(log_path_)) return;
  std::ifstream in(log_path_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const json event = json::parse(line, nullptr, false);
    if (event.is_discarded()) throw ParseError("corrupt review log entry", lineno);
    try {
      apply(event);
    } catch (const Error& e) {
      throw ParseError(std::string("review log: ") + e.what(), lineno);
    }
  }
}

void ReviewQueue::append(const json& event) {
  std::ofstream out(log_path_, std::ios::app);
  out << event.dump() << "\n";
  out.flush();
  if (!out) throw IoError("cannot append to " + log_path_.string());
}

void ReviewQueue::apply(const json& event) {
  const std::string kind = event.at("event").get<std::string>();
  if (kind == "enqueue") {
    CandidateItem item = candidate_from_json(event.at("item"));
    order_.push_back(item.pair_id);
    const auto id = item.pair_id;
    entries_[id] = Entry{std::move(item), ItemState::pending, std::nullopt};
  } else if (kind == "decision") {
    ReviewDecision d = decision_from_json(event.at("decision"));
    auto& e = entries_.at(d.pair_id);
    e.state = d.verdict == Verdict::accept ? ItemState::accepted : ItemState::rejected;
    e.decision = std::move(d);
  } else if (kind == "regen") {
    const auto& j = event.at("job");
    jobs_.push_back({j.at("job_id"), j.at("source_pair"), j.at("prompt_id"), j.at("run_id"), j.at("strength"),
                     j.at("attempt"), false, ""});
  } else if (kind == "job_done") {
    const auto id = event.at("job_id").get<std::string>();
    for (auto& job : jobs_) {
      if (job.job_id == id) {
        job.done = true;
        job.result_pair = event.at("result_pair").get<std::string>();
      }
    }
  } else {
    throw ParseError("unknown review event: " + kind);
  }
}

void ReviewQueue::enqueue(const CandidateItem& item) {
  std::unique_lock lock(mu_);
  if (entries_.contains(item.pair_id)) throw ConflictError("pair already queued: " + item.pair_id);
  const json event{{"event", "enqueue"}, {"item", to_json(item)}};
  append(event);
  apply(event);
}

std::optional<CandidateItem> ReviewQueue::next_candidate(const std::string& reviewer) {
  if (reviewer.empty()) throw ValidationError("reviewer id is required");
  std::unique_lock lock(mu_);
  const auto now = clock_();
  std::erase_if(leases_, [&](const auto& kv) { return kv.second.expires <= now; });
  for (const auto& [pair, l] : leases_) {
    if (l.reviewer == reviewer && entries_.at(pair).state == ItemState::pending) return entries_.at(pair).item;
  }
  for (const auto& id : order_) {
    const auto& e = entries_.at(id);
    if (e.state != ItemState::pending || leases_.contains(id)) continue;
    leases_[id] = Lease{reviewer, now + lease_duration_};
    return e.item;
  }
  return std::nullopt;
}

std::optional<RegenJob> ReviewQueue::submit_decision(ReviewDecision d) {
  std::unique_lock lock(mu_);
  const auto it = entries_.find(d.pair_id);
  if (it == entries_.end()) throw NotFoundError("unknown pair id: " + d.pair_id);
  Entry& e = it->second;
  if (e.state != ItemState::pending) {
    throw ConflictError("pair " + d.pair_id + " was already " + std::string(to_string(e.state)));
  }
  const auto now = clock_();
  const auto lease = leases_.find(d.pair_id);
  if (lease == leases_.end() || lease->second.reviewer != d.reviewer) {
    throw LeaseError("pair " + d.pair_id + " is not leased to reviewer " + d.reviewer);
  }
  if (lease->second.expires <= now) {
    leases_.erase(lease);
    throw LeaseError("lease expired for pair " + d.pair_id);
  }

  if (d.verdict == Verdict::reject) {
    if (d.failed.empty()) throw ValidationError("a reject must name at least one failed criterion");
    if (d.replacement) throw ValidationError("a manual correction is an accept, not a reject");
    if (d.adjusted_strength && !(*d.adjusted_strength > 0 && *d.adjusted_strength <= 1)) {
      throw ValidationError("adjusted strength must be in (0, 1]");
    }
  } else {
    if (!d.failed.empty()) throw ValidationError("an accept cannot list failed criteria");
    if (d.adjusted_strength) throw ValidationError("adjusted strength is only valid on reject");
    if (d.replacement) {
      if (!reverify_) throw ValidationError("manual corrections cannot be verified by this queue");
      const auto v = reverify_(e.item, imaging::read_png(*d.replacement));
      if (!v.labels_preserved) {
        throw ValidationError("corrected image still fails the label check for " + d.pair_id);
      }
    } else if (e.item.review_blocked()) {
      throw ValidationError("accept refused: automated label check failed for " + d.pair_id);
    }
  }

  d.timestamp = iso_time(now);
  const json event{{"event", "decision"}, {"decision", to_json(d)}};
  append(event);
  apply(event);
  leases_.erase(d.pair_id);

  if (d.verdict == Verdict::accept) {
    store_pair(e);
    return std::nullopt;
  }
  char id[32];
  std::snprintf(id, sizeof id, "job-%04zu", jobs_.size() + 1);
  const json job{{"job_id", id},
                 {"source_pair", e.item.pair_id},
                 {"prompt_id", e.item.prompt_id},
                 {"run_id", e.item.run_id},
                 {"strength", d.adjusted_strength.value_or(e.item.style.strength)},
                 {"attempt", e.item.attempt + 1}};
  const json regen{{"event", "regen"}, {"job", job}};
  append(regen);
  apply(regen);
  return jobs_.back();
}

void ReviewQueue::store_pair(const Entry& e) {
  const fs::path dir = pairs_store_ / e.item.pair_id;
  fs::create_directories(dir);
  fs::copy_file(e.item.prog_path, dir / "prog.png", fs::copy_options::overwrite_existing);
  const fs::path styled = e.decision->replacement.value_or(e.item.candidate_path);
  fs::copy_file(styled, dir / "styled.png", fs::copy_options::overwrite_existing);
  codec::write_file((dir / "verification.json").string(), metrics::to_json(e.item.verification).dump(2) + "\n");
  const json line{{"pair_id", e.item.pair_id},
                  {"prompt_id", e.item.prompt_id},
                  {"run_id", e.item.run_id},
                  {"attempt", e.item.attempt},
                  {"strength", e.item.style.strength},
                  {"prog", (dir / "prog.png").string()},
                  {"styled", (dir / "styled.png").string()},
                  {"reviewer", e.decision->reviewer},
                  {"decided_at", e.decision->timestamp},
                  {"manually_corrected", e.decision->replacement.has_value()}};
  std::ofstream out(pairs_store_ / "manifest.jsonl", std::ios::app);
  out << line.dump() << "\n";
  if (!out) throw IoError("cannot append to the pairs store manifest");
}

void ReviewQueue::complete_job(const std::string& job_id, const CandidateItem& result) {
  std::unique_lock lock(mu_);
  const auto job = std::find_if(jobs_.begin(), jobs_.end(), [&](const RegenJob& j) { return j.job_id == job_id; });
  if (job == jobs_.end()) throw NotFoundError("unknown job: " + job_id);
  if (job->done) throw ConflictError("job already completed: " + job_id);
  if (entries_.contains(result.pair_id)) throw ConflictError("pair already queued: " + result.pair_id);
  const json enqueue{{"event", "enqueue"}, {"item", to_json(result)}};
  append(enqueue);
  apply(enqueue);
  const json done{{"event", "job_done"}, {"job_id", job_id}, {"result_pair", result.pair_id}};
  append(done);
  apply(done);
}

QueueStats ReviewQueue::stats() const {
  std::shared_lock lock(mu_);
  QueueStats s;
  const auto now = clock_();
  for (const auto& [id, e] : entries_) {
    switch (e.state) {
      case ItemState::pending: {
        ++s.pending;
        const auto l = leases_.find(id);
        if (l != leases_.end() && l->second.expires > now) ++s.leased;
        break;
      }
      case ItemState::accepted: ++s.accepted; break;
      case ItemState::rejected: ++s.rejected; break;
    }
    if (e.item.attempt == 1 && e.state != ItemState::pending) {
      ++s.first_attempt_decided;
      if (e.state == ItemState::accepted) ++s.first_attempt_accepted;
    }
  }
  for (const auto& j : jobs_) s.regen_pending += j.done ? 0 : 1;
  if (s.first_attempt_decided) {
    s.first_attempt_pass_rate =
        static_cast<double>(s.first_attempt_accepted) / static_cast<double>(s.first_attempt_decided);
  }
  return s;
}

std::optional<CandidateItem> ReviewQueue::find(const std::string& pair_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(pair_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.item;
}

std::optional<ItemState> ReviewQueue::state(const std::string& pair_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(pair_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.state;
}

std::optional<Lease> ReviewQueue::lease(const std::string& pair_id) const {
  std::shared_lock lock(mu_);
  const auto it = leases_.find(pair_id);
  if (it == leases_.end() || it->second.expires <= clock_()) return std::nullopt;
  return it->second;
}

std::vector<RegenJob> ReviewQueue::jobs() const {
  std::shared_lock lock(mu_);
  return jobs_;
}

std::vector<CandidateItem> ReviewQueue::items() const {
  std::shared_lock lock(mu_);
  std::vector<CandidateItem> out;
  for (const auto& id : order_) out.push_back(entries_.at(id).item);
  return out;
}

namespace {

synth::RenderOutput load_prog(const fs::path& prompt_dir) {
  synth::RenderOutput prog;
  prog.image = imaging::read_png(prompt_dir / "prog.png");
  const json regions = json::parse(codec::read_text_file((prompt_dir / "regions.json").string()), nullptr, false);
  if (regions.is_discarded()) throw ParseError("corrupt regions.json in " + prompt_dir.string());
  prog.regions = synth::regions_from_json(regions);
  return prog;
}

CandidateItem make_candidate(const harness::PromptRecord& p, const harness::RunRecord& run, double strength,
                             int attempt, const std::string& parent, const harness::Backends& backends,
                             const harness::PipelineConfig& cfg, const fs::path& out_dir) {
  const synth::RenderOutput prog = load_prog(p.dir);
  CandidateItem item;
  item.pair_id = make_pair_id(p.prompt.id, strength, attempt);
  item.prompt_id = p.prompt.id;
  item.run_id = run.id;
  item.attempt = attempt;
  item.parent_pair = parent;
  item.prog_path = fs::absolute(p.dir / "prog.png");
  item.prog_regions = prog.regions;
  item.style = refine::StyleSpec::make(refine::style_prompt_for(p.prompt.grade_band, p.prompt.subject, cfg.style_prompt),
                                       strength, codec::derive_seed(cfg.seed, item.pair_id), cfg.style_params);
  const auto styled =
      refine::stylize_with_preservation(prog, item.style, *backends.diffusion, cfg.refine, backends.label_renderer.get());
  fs::create_directories(out_dir);
  item.candidate_path = fs::absolute(out_dir / (item.pair_id + ".png"));
  imaging::write_png(item.candidate_path, styled.image);
  item.verification = metrics::verify_pair(prog, styled.image, *backends.ocr, cfg.review.iou_threshold);
  return item;
}

}  // namespace

std::size_t enqueue_candidates(ReviewQueue& queue, const harness::RunRecord& run, std::span<const double> strengths,
                               const harness::Backends& backends, const harness::PipelineConfig& cfg) {
  if (strengths.empty()) throw ValidationError("no style strengths given");
  for (double s : strengths) {
    if (!(s > 0 && s <= 1)) throw ValidationError("style strength must be in (0, 1]");
  }
  if (run.succeeded() == 0) throw ValidationError("run " + run.id + " has no successful prompts");
  if (!backends.diffusion || !backends.ocr) throw ConfigError("enqueueing needs diffusion and OCR backends");
  const fs::path out_dir = queue.log_path().parent_path() / "candidates";
  std::size_t n = 0;
  for (const auto& p : run.prompts) {
    if (!p.ok) continue;
    for (double s : strengths) {
      if (queue.find(make_pair_id(p.prompt.id, s, 1))) continue;
      queue.enqueue(make_candidate(p, run, s, 1, "", backends, cfg, out_dir));
      ++n;
    }
  }
  return n;
}

std::size_t process_regen_jobs(ReviewQueue& queue, const harness::RunRecord& run, const harness::Backends& backends,
                               const harness::PipelineConfig& cfg) {
  const fs::path out_dir = queue.log_path().parent_path() / "candidates";
  std::size_t n = 0;
  for (const auto& job : queue.jobs()) {
    if (job.done || job.run_id != run.id) continue;
    const auto p = std::find_if(run.prompts.begin(), run.prompts.end(),
                                [&](const harness::PromptRecord& r) { return r.prompt.id == job.prompt_id; });
    if (p == run.prompts.end()) throw NotFoundError("prompt " + job.prompt_id + " not in run " + run.id);
    queue.complete_job(job.job_id, make_candidate(*p, run, job.strength, job.attempt, job.source_pair, backends, cfg,
                                                  out_dir));
    ++n;
  }
  return n;
}

}  // namespace cage::review
