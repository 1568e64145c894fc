#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cage/benchmark/manifest.hpp"
#include "cage/synth/types.hpp"

namespace cage::synth {

// Instruction text for the code-generation model. Every ground-truth label is
// embedded verbatim; when `feedback` is given the text ends with a correction
// clause naming each failed check.
std::string build_codegen_prompt(const benchmark::DiagramPrompt& prompt, RenderLanguage language,
                                 const VerificationResult* feedback = nullptr);

// Parsers for the instruction layout above; used by mock backends that need
// to react to the instruction deterministically.
std::optional<std::string> instruction_prompt_id(std::string_view instruction);
std::vector<std::string> instruction_labels(std::string_view instruction);
std::optional<RenderLanguage> instruction_language(std::string_view instruction);
bool instruction_has_feedback(std::string_view instruction);

// Extra model call used when the rendering language is chosen by the LLM.
std::string build_language_choice_prompt(const benchmark::DiagramPrompt& prompt);
bool is_language_choice_prompt(std::string_view instruction);
// The single language name mentioned in the response, if exactly one is.
std::optional<RenderLanguage> parse_language_choice(std::string_view response);

// Outcome of executing an artifact: either an output or an error message.
struct RenderAttempt {
  std::optional<RenderOutput> output;
  std::string error;
};

// Checks (1) labels present in text-rendering calls (case-insensitive),
// (2) execution succeeded, (3) structure sidecar connected. Structure is
// `skipped` without a sidecar.
VerificationResult verify_code(const CodeArtifact& artifact, const benchmark::DiagramPrompt& prompt,
                               const RenderAttempt* render);

// True iff the undirected graph is connected. On failure the detail lists the
// components not reachable from the first node.
std::pair<bool, std::string> check_structure(const StructureGraph& graph);

}  // namespace cage::synth
