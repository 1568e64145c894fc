#include <string>

#include "cage/error.hpp"
#include "cage/synth/label_extract.hpp"
#include "cage/synth/types.hpp"

namespace cage::synth {

using nlohmann::json;

std::string_view to_string(RenderLanguage lang) {
  switch (lang) {
    case RenderLanguage::python_matplotlib: return "python-matplotlib";
    case RenderLanguage::latex_tikz: return "latex-tikz";
    case RenderLanguage::svg: return "svg";
  }
  return "?";
}

RenderLanguage parse_language(std::string_view name) {
  for (RenderLanguage l : kAllLanguages) {
    if (to_string(l) == name) return l;
  }
  throw ParseError("unknown rendering language: " + std::string(name));
}

std::string_view source_extension(RenderLanguage lang) {
  switch (lang) {
    case RenderLanguage::python_matplotlib: return "py";
    case RenderLanguage::latex_tikz: return "tex";
    case RenderLanguage::svg: return "svg";
  }
  return "txt";
}

StructureGraph structure_from_json(const json& j) {
  StructureGraph g;
  try {
    for (const auto& n : j.at("nodes")) g.nodes.push_back(n.is_string() ? n.get<std::string>() : n.at("id").get<std::string>());
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        if (e.is_array()) {
          g.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        } else {
          g.edges.emplace_back(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed structure graph: ") + e.what());
  }
  return g;
}

json to_json(const StructureGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  return json{{"nodes", g.nodes}, {"edges", edges}};
}

CodeArtifact CodeArtifact::make(RenderLanguage language, std::string source, int attempt_index) {
  CodeArtifact a;
  a.language = language;
  a.source = std::move(source);
  a.attempt_index = attempt_index;
  try {
    a.extracted_labels = extract_label_calls(a.source, language);
  } catch (const ExtractionError& e) {
    a.extraction_error = e.what();
  }
  return a;
}

json regions_to_json(const std::vector<imaging::TextRegion>& regions) {
  json arr = json::array();
  for (const auto& r : regions) {
    arr.push_back({{"text", r.text}, {"bbox", {r.bbox.x, r.bbox.y, r.bbox.width, r.bbox.height}}});
  }
  return json{{"regions", arr}};
}

std::vector<imaging::TextRegion> regions_from_json(const json& j) {
  std::vector<imaging::TextRegion> out;
  try {
    const json& arr = j.is_array() ? j : j.at("regions");
    for (const auto& r : arr) {
      const auto& b = r.at("bbox");
      imaging::PixelRect rect;
      if (b.is_array()) {
        rect = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      } else {
        rect = {b.at("x").get<int>(), b.at("y").get<int>(), b.at("width").get<int>(), b.at("height").get<int>()};
      }
      out.push_back({r.at("text").get<std::string>(), rect});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed regions: ") + e.what());
  }
  return out;
}

std::string_view to_string(StructureStatus s) {
  switch (s) {
    case StructureStatus::pass: return "pass";
    case StructureStatus::fail: return "fail";
    case StructureStatus::skipped: return "skipped";
  }
  return "?";
}

json to_json(const VerificationResult& v) {
  return json{{"labels_ok", v.labels_ok},
              {"missing_labels", v.missing_labels},
              {"executes_ok", v.executes_ok},
              {"execution_error", v.execution_error},
              {"structure", to_string(v.structure)},
              {"structure_detail", v.structure_detail},
              {"warnings", v.warnings},
              {"passed", v.passed()}};
}

}  // namespace cage::synth
