#include <sstream>

#include "cage/synth/codegen.hpp"
#include "cage/text.hpp"

namespace cage::synth {

namespace {

constexpr std::string_view kIdKey = "Diagram id: ";
constexpr std::string_view kLanguageKey = "Rendering language: ";
constexpr std::string_view kLabelsHeader = "Required labels";
constexpr std::string_view kFeedbackHeader = "Your previous attempt failed these checks:";

std::string_view language_rules(RenderLanguage lang) {
  switch (lang) {
    case RenderLanguage::python_matplotlib:
      return "- Use matplotlib. Draw every label with plt.text(x, y, \"label\") or ax.annotate(\"label\", ...), "
             "passing the label as a plain string literal.\n"
             "- Do not call plt.show() or savefig(); the harness saves the current figure.\n"
             "- Write the diagram graph to structure.json as {\"nodes\": [...], \"edges\": [[a, b], ...]}.\n";
    case RenderLanguage::latex_tikz:
      return "- Emit a standalone LaTeX document with a single tikzpicture.\n"
             "- Place every label as the text of a \\node, e.g. \\node at (0,0) {Aorta};\n"
             "- Write the diagram graph to structure.json via \\immediate\\write18 or omit it.\n";
    case RenderLanguage::svg:
      return "- Emit one <svg width=\"...\" height=\"...\"> document.\n"
             "- Draw every label as a <text x=\"...\" y=\"...\">label</text> element.\n"
             "- Describe the diagram graph in <metadata id=\"structure\">{\"nodes\": [...], "
             "\"edges\": [[a, b], ...]}</metadata>.\n";
  }
  return "";
}

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::string build_codegen_prompt(const benchmark::DiagramPrompt& prompt, RenderLanguage language,
                                 const VerificationResult* feedback) {
  std::ostringstream out;
  out << "Write code that renders a labeled educational diagram.\n"
      << kIdKey << prompt.id << "\n"
      << "Subject: " << benchmark::to_string(prompt.subject) << "\n"
      << "Grade band: " << benchmark::to_string(prompt.grade_band) << "\n"
      << "Topic: " << prompt.topic << "\n";
  if (!prompt.prompt_text.empty()) out << "Request: " << prompt.prompt_text << "\n";
  out << kLanguageKey << to_string(language) << "\n\n"
      << kLabelsHeader << " (render each one verbatim, exactly as written):\n";
  for (const auto& l : prompt.labels) out << "- " << quote(l) << "\n";
  out << "\nRules:\n" << language_rules(language) << "- Output only the source code.\n";

  if (feedback && !feedback->passed()) {
    out << "\n" << kFeedbackHeader << "\n";
    if (!feedback->labels_ok) {
      std::vector<std::string> quoted;
      for (const auto& m : feedback->missing_labels) quoted.push_back(quote(m));
      out << "- labels: missing " << text::join(quoted, ", ") << "\n";
    }
    if (!feedback->executes_ok) out << "- execution: " << text::normalize_whitespace(feedback->execution_error) << "\n";
    if (feedback->structure == StructureStatus::fail) {
      out << "- structure: " << text::normalize_whitespace(feedback->structure_detail) << "\n";
    }
    out << "Fix every failed check and return the complete corrected source.\n";
  }
  return out.str();
}

std::optional<std::string> instruction_prompt_id(std::string_view instruction) {
  const auto at = instruction.find(kIdKey);
  if (at == std::string_view::npos) return std::nullopt;
  const auto start = at + kIdKey.size();
  const auto end = instruction.find('\n', start);
  return std::string(instruction.substr(start, end == std::string_view::npos ? end : end - start));
}

std::optional<RenderLanguage> instruction_language(std::string_view instruction) {
  const auto at = instruction.find(kLanguageKey);
  if (at == std::string_view::npos) return std::nullopt;
  const auto start = at + kLanguageKey.size();
  const auto end = instruction.find('\n', start);
  try {
    return parse_language(instruction.substr(start, end == std::string_view::npos ? end : end - start));
  } catch (...) {
    return std::nullopt;
  }
}

std::vector<std::string> instruction_labels(std::string_view instruction) {
  std::vector<std::string> labels;
  auto at = instruction.find(kLabelsHeader);
  if (at == std::string_view::npos) return labels;
  auto line_start = instruction.find('\n', at);
  while (line_start != std::string_view::npos) {
    ++line_start;
    const auto line_end = instruction.find('\n', line_start);
    const auto line = instruction.substr(line_start, line_end == std::string_view::npos ? line_end : line_end - line_start);
    if (line.size() < 3 || line.substr(0, 2) != "- ") break;
    try {
      labels.push_back(nlohmann::json::parse(line.substr(2)).get<std::string>());
    } catch (...) {
      break;
    }
    line_start = line_end;
  }
  return labels;
}

bool instruction_has_feedback(std::string_view instruction) {
  return instruction.find(kFeedbackHeader) != std::string_view::npos;
}

}  // namespace cage::synth

namespace cage::synth {

namespace {
constexpr std::string_view kChoiceHeader = "Choose the rendering language for this diagram.";
}

std::string build_language_choice_prompt(const benchmark::DiagramPrompt& prompt) {
  std::ostringstream out;
  out << kChoiceHeader << "\n"
      << kIdKey << prompt.id << "\n"
      << "Subject: " << benchmark::to_string(prompt.subject) << "\n"
      << "Topic: " << prompt.topic << "\n"
      << "Request: " << prompt.prompt_text << "\n"
      << "Answer with exactly one of: python-matplotlib, latex-tikz, svg.\n";
  return out.str();
}

bool is_language_choice_prompt(std::string_view instruction) { return instruction.starts_with(kChoiceHeader); }

std::optional<RenderLanguage> parse_language_choice(std::string_view response) {
  const std::string folded = text::fold(response);
  std::optional<RenderLanguage> found;
  for (auto lang : kAllLanguages) {
    if (folded.find(to_string(lang)) == std::string::npos) continue;
    if (found) return std::nullopt;  // ambiguous
    found = lang;
  }
  return found;
}

}  // namespace cage::synth
