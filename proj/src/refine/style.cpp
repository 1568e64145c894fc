#include "cage/refine/style.hpp"

#include "cage/error.hpp"

namespace cage::refine {

std::string style_prompt_for(benchmark::GradeBand band, benchmark::Subject,
                             const std::optional<std::string>& override_text) {
  if (override_text) return *override_text;
  switch (band) {
    case benchmark::GradeBand::k5: return std::string(kBaseStylePrompt) + ", bold simple shapes";
    case benchmark::GradeBand::g9_12: return std::string(kBaseStylePrompt) + ", detailed technical rendering";
    case benchmark::GradeBand::g6_8: break;
  }
  return kBaseStylePrompt;
}

StyleSpec StyleSpec::make(std::string prompt, double strength, std::uint64_t seed, nlohmann::json params) {
  if (!(strength > 0.0 && strength <= 1.0)) {
    throw ValidationError("style strength must be in (0, 1], got " + std::to_string(strength));
  }
  if (!params.is_object()) throw ValidationError("style params must be an object");
  return {std::move(prompt), strength, seed, std::move(params)};
}

nlohmann::json to_json(const StyleSpec& s) {
  return {{"prompt", s.prompt}, {"strength", s.strength}, {"seed", s.seed}, {"params", s.params}};
}

StyleSpec style_from_json(const nlohmann::json& j) {
  try {
    return StyleSpec::make(j.at("prompt").get<std::string>(), j.at("strength").get<double>(),
                           j.at("seed").get<std::uint64_t>(), j.value("params", nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed style spec: ") + e.what());
  }
}

}  // namespace cage::refine
