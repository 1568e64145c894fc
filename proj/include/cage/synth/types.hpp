#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/imaging/raster.hpp"

namespace cage::synth {

enum class RenderLanguage { python_matplotlib, latex_tikz, svg };

inline constexpr RenderLanguage kAllLanguages[] = {RenderLanguage::python_matplotlib, RenderLanguage::latex_tikz,
                                                   RenderLanguage::svg};

std::string_view to_string(RenderLanguage lang);
RenderLanguage parse_language(std::string_view name);
// File extension used for persisted sources, without the dot.
std::string_view source_extension(RenderLanguage lang);

// Optional machine-readable node/edge description emitted by generated code.
struct StructureGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
};

StructureGraph structure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StructureGraph& g);

struct CodeArtifact {
  RenderLanguage language = RenderLanguage::svg;
  std::string source;
  std::vector<std::string> extracted_labels;
  int attempt_index = 1;
  // Set when the lexical scan failed; extracted_labels is then empty.
  std::optional<std::string> extraction_error;

  // Runs extract_label_calls so the invariant holds at construction.
  static CodeArtifact make(RenderLanguage language, std::string source, int attempt_index);
};

struct RenderOutput {
  imaging::RasterImage image;
  std::vector<imaging::TextRegion> regions;
  std::optional<StructureGraph> structure;
  std::string stdout_text;
  std::string stderr_text;
  long long wall_ms = 0;
};

nlohmann::json regions_to_json(const std::vector<imaging::TextRegion>& regions);
std::vector<imaging::TextRegion> regions_from_json(const nlohmann::json& j);

enum class StructureStatus { pass, fail, skipped };
std::string_view to_string(StructureStatus s);

struct VerificationResult {
  bool labels_ok = false;
  std::vector<std::string> missing_labels;
  bool executes_ok = false;
  std::string execution_error;
  StructureStatus structure = StructureStatus::skipped;
  std::string structure_detail;
  std::vector<std::string> warnings;

  bool passed() const { return labels_ok && executes_ok && structure != StructureStatus::fail; }
};

nlohmann::json to_json(const VerificationResult& v);

}  // namespace cage::synth
