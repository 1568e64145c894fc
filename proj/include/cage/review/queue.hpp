#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/error.hpp"
#include "cage/harness/config.hpp"
#include "cage/harness/pipeline.hpp"
#include "cage/imaging/raster.hpp"
#include "cage/metrics/pairs.hpp"
#include "cage/refine/style.hpp"

namespace cage::review {

class LeaseError : public Error {
 public:
  using Error::Error;
};
class NotFoundError : public Error {
 public:
  using Error::Error;
};
class ConflictError : public Error {
 public:
  using Error::Error;
};

enum class Criterion { labels, topology, visual };
std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view s);

struct CandidateItem {
  std::string pair_id;
  std::string prompt_id;
  std::string run_id;
  std::filesystem::path prog_path;
  std::filesystem::path candidate_path;
  std::vector<imaging::TextRegion> prog_regions;
  metrics::PairVerification verification;
  refine::StyleSpec style;
  int attempt = 1;
  std::string parent_pair;  // pair this one regenerates, empty on attempt 1

  // Automated label check failed: the item cannot be accepted as is.
  bool review_blocked() const { return !verification.labels_preserved; }
  std::string suggested_verdict() const { return verification.topology_ok && !review_blocked() ? "" : "reject"; }
};

nlohmann::json to_json(const CandidateItem& item);
CandidateItem candidate_from_json(const nlohmann::json& j);

enum class Verdict { accept, reject };

struct ReviewDecision {
  std::string pair_id;
  Verdict verdict = Verdict::accept;
  std::set<Criterion> failed;
  std::optional<double> adjusted_strength;  // reject only
  std::string reviewer;
  std::string timestamp;  // set by the queue
  // Accept with a hand-corrected image in place of the candidate.
  std::optional<std::filesystem::path> replacement;
};

nlohmann::json to_json(const ReviewDecision& d);
ReviewDecision decision_from_json(const nlohmann::json& j);

struct RegenJob {
  std::string job_id;
  std::string source_pair;
  std::string prompt_id;
  std::string run_id;
  double strength = 0;
  int attempt = 2;
  bool done = false;
  std::string result_pair;
};

nlohmann::json to_json(const RegenJob& j);

enum class ItemState { pending, accepted, rejected };
std::string_view to_string(ItemState s);

struct QueueStats {
  std::size_t pending = 0;
  std::size_t leased = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t regen_pending = 0;
  std::size_t first_attempt_decided = 0;
  std::size_t first_attempt_accepted = 0;
  std::optional<double> first_attempt_pass_rate;  // null before any attempt-1 decision
};

nlohmann::json to_json(const QueueStats& s);

struct Lease {
  std::string reviewer;
  std::chrono::system_clock::time_point expires;
};

// Re-verifies a hand-corrected image against the item's I_prog.
using Reverifier = std::function<metrics::PairVerification(const CandidateItem&, const imaging::RasterImage&)>;

// Review queue backed by an append-only event log (`events.jsonl` in
// `log_dir`); state is rebuilt from the log on construction. Accepted pairs
// are copied into `pairs_store` and listed in its manifest.jsonl.
class ReviewQueue {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  ReviewQueue(std::filesystem::path log_dir, std::filesystem::path pairs_store,
              std::chrono::seconds lease = std::chrono::minutes(10), Clock clock = nullptr,
              Reverifier reverify = nullptr);

  // Throws ConflictError when the pair id is already queued.
  void enqueue(const CandidateItem& item);

  // Oldest pending item not under a live lease, now leased to `reviewer`. A
  // reviewer already holding a live lease gets that item back.
  std::optional<CandidateItem> next_candidate(const std::string& reviewer);

  // Throws NotFoundError, LeaseError (not leased to this reviewer or
  // expired), ConflictError (already decided) or ValidationError (reject
  // without criteria, accept while the label check fails, strength outside
  // (0, 1]). Returns the regeneration job created by a reject.
  std::optional<RegenJob> submit_decision(ReviewDecision decision);

  QueueStats stats() const;
  std::optional<CandidateItem> find(const std::string& pair_id) const;
  std::optional<ItemState> state(const std::string& pair_id) const;
  std::optional<Lease> lease(const std::string& pair_id) const;
  std::vector<RegenJob> jobs() const;
  std::vector<CandidateItem> items() const;

  // Marks a job done and enqueues its result (attempt = job.attempt).
  void complete_job(const std::string& job_id, const CandidateItem& result);

  const std::filesystem::path& log_path() const { return log_path_; }
  const std::filesystem::path& pairs_store() const { return pairs_store_; }

 private:
  struct Entry {
    CandidateItem item;
    ItemState state = ItemState::pending;
    std::optional<ReviewDecision> decision;
  };

  void append(const nlohmann::json& event);
  void apply(const nlohmann::json& event);
  void store_pair(const Entry& e);

  std::filesystem::path log_path_;
  std::filesystem::path pairs_store_;
  std::chrono::seconds lease_duration_;
  Clock clock_;
  Reverifier reverify_;

  mutable std::shared_mutex mu_;
  std::vector<std::string> order_;  // enqueue order
  std::map<std::string, Entry> entries_;
  std::map<std::string, Lease> leases_;
  std::vector<RegenJob> jobs_;
};

std::string make_pair_id(const std::string& prompt_id, double strength, int attempt);

// One candidate per (successful prompt, strength), stylized with the run's
// diffusion backend and verified with `ocr`. Candidate images are written to
// <queue log dir>/candidates/. Returns the number of items enqueued.
std::size_t enqueue_candidates(ReviewQueue& queue, const harness::RunRecord& run, std::span<const double> strengths,
                               const harness::Backends& backends, const harness::PipelineConfig& cfg);

// Runs every pending regeneration job whose run is `run`, enqueueing the
// new candidates. Returns the number of jobs completed.
std::size_t process_regen_jobs(ReviewQueue& queue, const harness::RunRecord& run, const harness::Backends& backends,
                               const harness::PipelineConfig& cfg);

}  // namespace cage::review
