#include "cage/benchmark/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/text.hpp"

namespace cage::benchmark {

using nlohmann::json;

std::string_view to_string(Subject s) {
  switch (s) {
    case Subject::biology: return "biology";
    case Subject::chemistry: return "chemistry";
    case Subject::physics: return "physics";
    case Subject::mathematics: return "mathematics";
  }
  return "?";
}

std::string_view to_string(GradeBand g) {
  switch (g) {
    case GradeBand::k5: return "K-5";
    case GradeBand::g6_8: return "6-8";
    case GradeBand::g9_12: return "9-12";
  }
  return "?";
}

Subject parse_subject(std::string_view s) {
  for (Subject v : kAllSubjects) {
    if (to_string(v) == s) return v;
  }
  throw ParseError("unknown subject: " + std::string(s));
}

GradeBand parse_grade_band(std::string_view s) {
  for (GradeBand g : {GradeBand::k5, GradeBand::g6_8, GradeBand::g9_12}) {
    if (to_string(g) == s) return g;
  }
  throw ParseError("unknown grade band: " + std::string(s));
}

DiagramPrompt DiagramPrompt::make(std::string id, Subject subject, GradeBand band, std::string topic,
                                  std::vector<std::string> labels, std::string prompt_text) {
  if (text::trim(id).empty()) throw ValidationError("prompt id must not be empty");
  if (text::trim(topic).empty()) throw ValidationError("prompt " + id + ": topic must not be empty");
  if (labels.empty()) throw ValidationError("prompt " + id + ": at least one label is required");
  for (const auto& l : labels) {
    if (text::trim(l).empty()) throw ValidationError("prompt " + id + ": empty label");
  }
  return DiagramPrompt{std::move(id), subject, band, std::move(topic), std::move(labels), std::move(prompt_text)};
}

json to_json(const DiagramPrompt& p) {
  return json{{"id", p.id},
              {"subject", to_string(p.subject)},
              {"grade_band", to_string(p.grade_band)},
              {"topic", p.topic},
              {"labels", p.labels},
              {"prompt_text", p.prompt_text}};
}

DiagramPrompt prompt_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record is not an object");
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j.at(key).is_string()) throw ParseError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
  };
  if (!j.contains("labels") || !j.at("labels").is_array()) throw ParseError("missing array field 'labels'");
  std::vector<std::string> labels;
  for (const auto& l : j.at("labels")) {
    if (!l.is_string()) throw ParseError("labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  try {
    return DiagramPrompt::make(str("id"), parse_subject(str("subject")), parse_grade_band(str("grade_band")),
                               str("topic"), std::move(labels), j.contains("prompt_text") ? str("prompt_text") : "");
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

std::vector<DiagramPrompt> parse_manifest(std::string_view content) {
  std::vector<DiagramPrompt> prompts;
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> duplicates;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    const std::string line = text::trim(content.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }
    DiagramPrompt p;
    try {
      p = prompt_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (seen.contains(p.id)) {
      duplicates.push_back(p.id + " (lines " + std::to_string(seen[p.id]) + ", " + std::to_string(line_no) + ")");
    } else {
      seen[p.id] = line_no;
    }
    prompts.push_back(std::move(p));
    if (end == content.size()) break;
  }
  if (!duplicates.empty()) throw ValidationError("duplicate prompt id: " + text::join(duplicates, "; "));
  return prompts;
}

std::vector<DiagramPrompt> load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("manifest not found: " + path.string());
  return parse_manifest(codec::read_text_file(path.string()));
}

std::string serialize_manifest(const std::vector<DiagramPrompt>& prompts) {
  std::string out;
  for (const auto& p : prompts) {
    out += to_json(p).dump();
    out.push_back('\n');
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<DiagramPrompt>& prompts) {
  codec::write_file(path.string(), serialize_manifest(prompts));
}

Strata reference_strata() {
  return {{Subject::biology, 110}, {Subject::chemistry, 95}, {Subject::physics, 95}, {Subject::mathematics, 100}};
}

ManifestValidation validate_manifest(const std::vector<DiagramPrompt>& prompts, const std::optional<Strata>& expected) {
  ManifestValidation v;
  std::map<std::string, std::size_t> id_counts;
  for (const auto& p : prompts) {
    ++v.counts[p.subject];
    ++id_counts[p.id];
    bool empty = p.labels.empty();
    std::set<std::string> folded;
    std::set<std::string> reported;
    for (const auto& l : p.labels) {
      const std::string key = text::fold(l);
      if (key.empty()) {
        empty = true;
        continue;
      }
      if (!folded.insert(key).second && reported.insert(key).second) v.duplicate_labels.push_back(p.id + ": " + l);
    }
    if (empty) v.empty_labels.push_back(p.id);
  }
  for (const auto& [id, n] : id_counts) {
    if (n > 1) v.duplicate_ids.push_back(id);
  }
  if (prompts.empty()) v.errors.emplace_back("manifest contains zero prompts");
  if (expected) {
    for (Subject s : kAllSubjects) {
      const std::size_t want = expected->contains(s) ? expected->at(s) : 0;
      const std::size_t got = v.counts.contains(s) ? v.counts.at(s) : 0;
      if (want != got) {
        v.strata_mismatches.push_back(std::string(to_string(s)) + ": expected " + std::to_string(want) + ", got " +
                                      std::to_string(got));
      }
    }
  }
  v.pass = v.duplicate_ids.empty() && v.empty_labels.empty() && v.duplicate_labels.empty() &&
           v.strata_mismatches.empty() && v.errors.empty();
  return v;
}

}  // namespace cage::benchmark
