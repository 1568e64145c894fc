#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cage/benchmark/manifest.hpp"

namespace cage::refine {

inline constexpr const char* kBaseStylePrompt =
    "clean educational illustration, professional textbook diagram, clear colors, white background";

// The base prompt with a grade-band modifier; `override_text` wins verbatim.
std::string style_prompt_for(benchmark::GradeBand band, benchmark::Subject subject,
                             const std::optional<std::string>& override_text = std::nullopt);

struct StyleSpec {
  std::string prompt;
  double strength = 0.6;
  std::uint64_t seed = 0;
  // Opaque backend parameters (conditioning scale, steps, sampler, ...).
  nlohmann::json params = nlohmann::json::object();

  // Throws ValidationError unless 0 < strength <= 1 and params is an object.
  static StyleSpec make(std::string prompt, double strength, std::uint64_t seed,
                        nlohmann::json params = nlohmann::json::object());
};

nlohmann::json to_json(const StyleSpec& s);
StyleSpec style_from_json(const nlohmann::json& j);

}  // namespace cage::refine
