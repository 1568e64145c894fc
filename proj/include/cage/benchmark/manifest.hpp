#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cage::benchmark {

enum class Subject { biology, chemistry, physics, mathematics };
enum class GradeBand { k5, g6_8, g9_12 };

std::string_view to_string(Subject s);
std::string_view to_string(GradeBand g);
Subject parse_subject(std::string_view s);
GradeBand parse_grade_band(std::string_view s);

inline constexpr Subject kAllSubjects[] = {Subject::biology, Subject::chemistry, Subject::physics,
                                           Subject::mathematics};

// One benchmark item. Construct through `make`, which rejects empty ids,
// topics and labels.
struct DiagramPrompt {
  std::string id;
  Subject subject = Subject::biology;
  GradeBand grade_band = GradeBand::g6_8;
  std::string topic;
  std::vector<std::string> labels;
  std::string prompt_text;

  static DiagramPrompt make(std::string id, Subject subject, GradeBand band, std::string topic,
                            std::vector<std::string> labels, std::string prompt_text);

  friend bool operator==(const DiagramPrompt&, const DiagramPrompt&) = default;
};

nlohmann::json to_json(const DiagramPrompt& p);
DiagramPrompt prompt_from_json(const nlohmann::json& j);

// Line-delimited JSON, one record per line. Blank lines are skipped.
// Throws ParseError (with the line number) or ValidationError on duplicate ids.
std::vector<DiagramPrompt> load_manifest(const std::filesystem::path& path);
std::vector<DiagramPrompt> parse_manifest(std::string_view text);
std::string serialize_manifest(const std::vector<DiagramPrompt>& prompts);
void write_manifest(const std::filesystem::path& path, const std::vector<DiagramPrompt>& prompts);

struct ManifestValidation {
  std::map<Subject, std::size_t> counts;
  std::vector<std::string> duplicate_ids;
  std::vector<std::string> empty_labels;       // "<id>" for prompts with an empty/blank label or no labels
  std::vector<std::string> duplicate_labels;   // "<id>: <label>" repeated after folding
  std::vector<std::string> strata_mismatches;  // "<subject>: expected N, got M"
  std::vector<std::string> errors;             // anything else (e.g. zero prompts)
  bool pass = false;
};

using Strata = std::map<Subject, std::size_t>;

// The benchmark's stratification: 110/95/95/100.
Strata reference_strata();

ManifestValidation validate_manifest(const std::vector<DiagramPrompt>& prompts,
                                     const std::optional<Strata>& expected = std::nullopt);

}  // namespace cage::benchmark
