#include "cage/harness/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <set>
#include <thread>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/refine/diffusion.hpp"
#include "cage/synth/codegen.hpp"
#include "cage/synth/repair.hpp"

namespace cage::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) { codec::write_file(path.string(), j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const json j = json::parse(codec::read_text_file(path.string()), nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + " is not valid JSON");
  return j;
}

json status_json(const PromptRecord& r) {
  json j{{"id", r.prompt.id},
         {"status", r.ok ? "ok" : "failed"},
         {"attempts", r.attempts},
         {"language", r.language ? json(synth::to_string(*r.language)) : json(nullptr)},
         {"edge_respect", r.edge_respect ? json(*r.edge_respect) : json(nullptr)},
         {"warnings", r.warnings}};
  if (!r.ok) {
    j["stage"] = r.stage;
    j["error"] = r.error;
  }
  return j;
}

void apply_status(PromptRecord& r, const json& j) {
  r.ok = j.at("status") == "ok";
  r.attempts = j.value("attempts", 0);
  if (j.contains("language") && j["language"].is_string()) {
    r.language = synth::parse_language(j["language"].get<std::string>());
  }
  if (j.contains("edge_respect") && j["edge_respect"].is_number()) r.edge_respect = j["edge_respect"].get<double>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
  r.stage = j.value("stage", "");
  r.error = j.value("error", "");
}

PromptRecord process_prompt(const benchmark::DiagramPrompt& prompt, const Backends& backends,
                            const PipelineConfig& cfg, const fs::path& dir) {
  PromptRecord rec;
  rec.prompt = prompt;
  rec.dir = dir;
  fs::create_directories(dir);
  write_json(dir / "prompt.json", benchmark::to_json(prompt));

  rec.stage = "language";
  try {
    const auto lang = choose_language(prompt, cfg.language, *backends.llm, rec.warnings);
    rec.language = lang;
    const auto renderer = backends.renderers.find(lang);
    if (renderer == backends.renderers.end()) {
      throw ConfigError("no renderer configured for " + std::string(synth::to_string(lang)));
    }

    rec.stage = "synth";
    synth::RepairOptions ropts;
    ropts.max_attempts = cfg.max_attempts;
    ropts.limits = cfg.limits;
    ropts.attempts_dir = dir;
    synth::SynthesisResult synth_result;
    try {
      synth_result = synth::synthesize_with_repair(prompt, *backends.llm, *renderer->second, lang, ropts);
    } catch (const synth::RepairExhausted& e) {
      rec.attempts = static_cast<int>(e.attempts().size());
      throw;
    }
    rec.attempts = synth_result.artifact.attempt_index;
    const auto& prog = synth_result.output;
    for (const auto& w : synth_result.attempts.back().verification.warnings) rec.warnings.push_back(w);
    codec::write_file((dir / ("code." + std::string(synth::source_extension(lang)))).string(),
                      synth_result.artifact.source);
    imaging::write_png(dir / "prog.png", prog.image);
    write_json(dir / "regions.json", synth::regions_to_json(prog.regions));
    if (prog.structure) write_json(dir / "structure.json", synth::to_json(*prog.structure));

    rec.stage = "refine";
    const auto style = refine::StyleSpec::make(
        refine::style_prompt_for(prompt.grade_band, prompt.subject, cfg.style_prompt), cfg.style_strength,
        codec::derive_seed(cfg.seed, prompt.id), cfg.style_params);
    write_json(dir / "style.json", refine::to_json(style));
    const auto styled = refine::stylize_with_preservation(prog, style, *backends.diffusion, cfg.refine,
                                                          backends.label_renderer.get());
    for (const auto& w : styled.request.warnings) rec.warnings.push_back(w);
    imaging::write_binary_png(dir / "edges.png", styled.request.edge_map);
    imaging::write_binary_png(dir / "mask.png", styled.request.preservation_mask);
    imaging::write_png(dir / "diffusion.png", styled.raw);
    imaging::write_png(dir / "refined.png", styled.image);
    rec.edge_respect = refine::edge_respect(prog.image, styled.image, cfg.refine.canny);
    rec.ok = true;
    rec.stage.clear();
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  write_json(dir / "status.json", status_json(rec));
  return rec;
}

}  // namespace

std::size_t RunRecord::succeeded() const {
  std::size_t n = 0;
  for (const auto& p : prompts) n += p.ok ? 1 : 0;
  return n;
}

std::string default_run_id() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "run-%Y%m%d-%H%M%S", &tm);
  return buf;
}

synth::RenderLanguage choose_language(const benchmark::DiagramPrompt& prompt, const LanguagePolicy& policy,
                                      const synth::LlmBackend& llm, std::vector<std::string>& warnings) {
  if (policy.mode == LanguagePolicy::Mode::fixed) {
    const auto it = policy.by_subject.find(prompt.subject);
    return it == policy.by_subject.end() ? policy.fallback : it->second;
  }
  const std::string answer = llm.generate(synth::build_language_choice_prompt(prompt));
  if (const auto lang = synth::parse_language_choice(answer)) return *lang;
  warnings.push_back("language choice answer not recognised; using " + std::string(synth::to_string(policy.fallback)));
  return policy.fallback;
}

RunRecord run_pipeline(const std::vector<benchmark::DiagramPrompt>& manifest, const Backends& backends,
                       const PipelineConfig& cfg, const RunOptions& options) {
  if (manifest.empty()) throw ValidationError("manifest contains zero prompts");
  std::set<std::string> ids;
  for (const auto& p : manifest) {
    if (!ids.insert(p.id).second) throw ValidationError("duplicate prompt id: " + p.id);
  }
  if (!backends.llm || !backends.diffusion) throw ConfigError("pipeline needs an llm and a diffusion backend");

  RunRecord run;
  run.id = options.run_id.empty() ? default_run_id() : options.run_id;
  run.dir = cfg.runs_dir / run.id;
  if (fs::exists(run.dir) && !fs::is_empty(run.dir)) {
    if (!options.overwrite) throw IoError("run directory already exists: " + run.dir.string());
    fs::remove_all(run.dir);
  }
  fs::create_directories(run.dir);
  run.config = cfg.source;
  run.backends = backends.identities();
  write_json(run.dir / "config.json", cfg.source);

  run.prompts.resize(manifest.size());
  std::vector<long long> wall_ms(manifest.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      const auto start = std::chrono::steady_clock::now();
      run.prompts[i] = process_prompt(manifest[i], backends, cfg, run.dir / manifest[i].id);
      wall_ms[i] = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                       .count();
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), manifest.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json prompts = json::array();
  json timing = json::object();
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = run.prompts[i];
    json p{{"id", r.prompt.id}, {"status", r.ok ? "ok" : "failed"}, {"attempts", r.attempts}};
    if (!r.ok) p["error"] = r.error;
    prompts.push_back(std::move(p));
    timing[r.prompt.id] = wall_ms[i];
  }
  write_json(run.dir / "run.json", {{"run_id", run.id},
                                    {"backends", run.backends},
                                    {"prompts", prompts},
                                    {"succeeded", run.succeeded()},
                                    {"failed", manifest.size() - run.succeeded()}});
  write_json(run.dir / "timing.json", {{"jobs", cfg.jobs}, {"prompt_wall_ms", timing}});
  return run;
}

RunRecord load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("run directory not found: " + dir.string());
  RunRecord run;
  run.dir = dir;
  try {
    const json meta = read_json(dir / "run.json");
    run.id = meta.at("run_id").get<std::string>();
    run.backends = meta.value("backends", json::object());
    run.config = read_json(dir / "config.json");
    for (const auto& p : meta.at("prompts")) {
      PromptRecord rec;
      rec.dir = dir / p.at("id").get<std::string>();
      rec.prompt = benchmark::prompt_from_json(read_json(rec.dir / "prompt.json"));
      apply_status(rec, read_json(rec.dir / "status.json"));
      run.prompts.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed run record in " + dir.string() + ": " + e.what());
  }
  return run;
}

}  // namespace cage::harness
