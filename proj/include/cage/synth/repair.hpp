#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cage/benchmark/manifest.hpp"
#include "cage/error.hpp"
#include "cage/synth/codegen.hpp"
#include "cage/synth/llm.hpp"
#include "cage/synth/renderer.hpp"
#include "cage/synth/types.hpp"

namespace cage::synth {

struct RepairOptions {
  int max_attempts = 3;
  RenderLimits limits;
  // When set, attempt-<n>/ directories are written here.
  std::optional<std::filesystem::path> attempts_dir;
};

struct AttemptRecord {
  CodeArtifact artifact;
  VerificationResult verification;
};

struct SynthesisResult {
  CodeArtifact artifact;
  RenderOutput output;
  std::vector<AttemptRecord> attempts;
};

class RepairExhausted : public Error {
 public:
  RepairExhausted(VerificationResult last, std::vector<AttemptRecord> attempts);
  const VerificationResult& last() const { return last_; }
  const std::vector<AttemptRecord>& attempts() const { return attempts_; }

 private:
  VerificationResult last_;
  std::vector<AttemptRecord> attempts_;
};

// Generate, render and verify until every check passes, feeding the failed
// checks back into the next instruction. Throws RepairExhausted after
// `max_attempts` failures; LLM errors propagate.
SynthesisResult synthesize_with_repair(const benchmark::DiagramPrompt& prompt, const LlmBackend& llm,
                                       const RendererBackend& renderer, RenderLanguage language,
                                       const RepairOptions& options = {});

// Writes code.<ext>, prog.png, regions.json and verify.json for one attempt.
void persist_attempt(const std::filesystem::path& dir, const CodeArtifact& artifact, const RenderAttempt& render,
                     const VerificationResult& verification);

}  // namespace cage::synth
