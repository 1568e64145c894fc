#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/benchmark/manifest.hpp"
#include "cage/harness/config.hpp"
#include "cage/synth/types.hpp"

namespace cage::harness {

struct PromptRecord {
  benchmark::DiagramPrompt prompt;
  bool ok = false;
  std::string stage;  // failing stage: language, synth or refine
  std::string error;
  int attempts = 0;
  std::optional<synth::RenderLanguage> language;
  std::optional<double> edge_respect;
  std::vector<std::string> warnings;
  std::filesystem::path dir;
};

struct RunRecord {
  std::string id;
  std::filesystem::path dir;
  nlohmann::json config;
  nlohmann::json backends;
  std::vector<PromptRecord> prompts;

  std::size_t succeeded() const;
};

struct RunOptions {
  std::string run_id;      // empty: derived from the current UTC time
  bool overwrite = false;  // replace an existing run directory
};

// Synthesize, refine and persist every prompt on a pool of cfg.jobs workers.
// Per-prompt failures are recorded in the prompt's status.json and do not
// stop the run. Layout under cfg.runs_dir/<id>/:
//   config.json run.json timing.json
//   <prompt-id>/prompt.json attempt-<n>/... code.<ext> prog.png regions.json
//     [structure.json] edges.png mask.png diffusion.png refined.png
//     style.json status.json
RunRecord run_pipeline(const std::vector<benchmark::DiagramPrompt>& manifest, const Backends& backends,
                       const PipelineConfig& cfg, const RunOptions& options = {});

RunRecord load_run(const std::filesystem::path& dir);

std::string default_run_id();

// Resolves the rendering language for one prompt under the policy. With the
// llm mode an unusable answer falls back to the policy default and adds a
// warning.
synth::RenderLanguage choose_language(const benchmark::DiagramPrompt& prompt, const LanguagePolicy& policy,
                                      const synth::LlmBackend& llm, std::vector<std::string>& warnings);

}  // namespace cage::harness
