#include "cage/synth/repair.hpp"

#include <nlohmann/json.hpp>

#include "cage/codec.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/synth/codegen.hpp"
#include "cage/text.hpp"

namespace cage::synth {

namespace {

std::string exhausted_message(const VerificationResult& v, std::size_t attempts) {
  std::string msg = "repair loop exhausted after " + std::to_string(attempts) + " attempt(s)";
  if (!v.labels_ok) msg += "; missing labels: " + text::join(v.missing_labels, ", ");
  if (!v.executes_ok) msg += "; execution: " + v.execution_error;
  if (v.structure == StructureStatus::fail) msg += "; structure: " + v.structure_detail;
  return msg;
}

}  // namespace

RepairExhausted::RepairExhausted(VerificationResult last, std::vector<AttemptRecord> attempts)
    : Error(exhausted_message(last, attempts.size())), last_(std::move(last)), attempts_(std::move(attempts)) {}

void persist_attempt(const std::filesystem::path& dir, const CodeArtifact& artifact, const RenderAttempt& render,
                     const VerificationResult& verification) {
  std::filesystem::create_directories(dir);
  codec::write_file((dir / ("code." + std::string(source_extension(artifact.language)))).string(), artifact.source);
  if (render.output) {
    imaging::write_png(dir / "prog.png", render.output->image);
    codec::write_file((dir / "regions.json").string(), regions_to_json(render.output->regions).dump(2) + "\n");
  }
  nlohmann::json v = to_json(verification);
  v["attempt_index"] = artifact.attempt_index;
  v["extracted_labels"] = artifact.extracted_labels;
  if (artifact.extraction_error) v["extraction_error"] = *artifact.extraction_error;
  codec::write_file((dir / "verify.json").string(), v.dump(2) + "\n");
}

SynthesisResult synthesize_with_repair(const benchmark::DiagramPrompt& prompt, const LlmBackend& llm,
                                       const RendererBackend& renderer, RenderLanguage language,
                                       const RepairOptions& options) {
  if (options.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  std::vector<AttemptRecord> attempts;
  std::optional<VerificationResult> feedback;
  for (int n = 1; n <= options.max_attempts; ++n) {
    const std::string instruction = build_codegen_prompt(prompt, language, feedback ? &*feedback : nullptr);
    std::string source = llm.generate(instruction);
    if (text::trim(source).empty()) source.clear();
    CodeArtifact artifact = CodeArtifact::make(language, std::move(source), n);

    RenderAttempt attempt;
    try {
      attempt.output = render(artifact, renderer, options.limits);
    } catch (const Error& e) {
      attempt.error = e.what();
    }
    VerificationResult v = verify_code(artifact, prompt, &attempt);
    if (options.attempts_dir) {
      persist_attempt(*options.attempts_dir / ("attempt-" + std::to_string(n)), artifact, attempt, v);
    }
    attempts.push_back({artifact, v});
    if (v.passed()) return {std::move(artifact), std::move(*attempt.output), std::move(attempts)};
    feedback = std::move(v);
  }
  throw RepairExhausted(*feedback, std::move(attempts));
}

}  // namespace cage::synth
