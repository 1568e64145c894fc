#include "cage/synth/llm.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "cage/error.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/subprocess.hpp"
#include "cage/synth/codegen.hpp"
#include "cage/text.hpp"

namespace cage::synth {

using nlohmann::json;

std::string ScriptedLlm::generate(const std::string& instruction) const {
  std::string key = instruction_prompt_id(instruction).value_or("*");
  if (!scripts_.contains(key)) key = "*";
  const auto it = scripts_.find(key);
  if (it == scripts_.end() || it->second.empty()) throw BackendError("scripted LLM has no script for " + key);
  std::size_t n;
  {
    std::lock_guard lock(mu_);
    n = counters_[key]++;
  }
  return it->second[std::min(n, it->second.size() - 1)];
}

std::size_t ScriptedLlm::calls(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = counters_.find(key);
  return it == counters_.end() ? 0 : it->second;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string tex_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::string_view("&%$#_{}").find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string template_python(const std::vector<std::string>& labels) {
  std::ostringstream src;
  src << "import json\nimport matplotlib.pyplot as plt\n\n"
      << "fig, ax = plt.subplots(figsize=(4, " << std::max<std::size_t>(2, labels.size() / 2 + 1) << "))\n"
      << "ax.set_axis_off()\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    src << "ax.text(0.1, " << 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(labels.size())
        << ", " << json(labels[i]).dump() << ", bbox=dict(facecolor='white'))\n";
  }
  json graph{{"nodes", labels}, {"edges", json::array()}};
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) graph["edges"].push_back({labels[i], labels[i + 1]});
  src << "with open('structure.json', 'w') as fh:\n    fh.write(" << json(graph.dump()).dump() << ")\n";
  return src.str();
}

std::string template_tikz(const std::vector<std::string>& labels) {
  std::ostringstream src;
  src << "\\documentclass[tikz]{standalone}\n\\begin{document}\n\\begin{tikzpicture}\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    src << "  \\node[draw] (n" << i << ") at (0," << -static_cast<int>(i) << ") {" << tex_escape(labels[i]) << "};\n";
  }
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) src << "  \\draw (n" << i << ") -- (n" << i + 1 << ");\n";
  src << "\\end{tikzpicture}\n\\end{document}\n";
  return src.str();
}

}  // namespace

std::string template_svg(const std::vector<std::string>& labels) {
  constexpr int kScale = 2;
  constexpr int kRowHeight = 40;
  struct Placed {
    int x, y, w, h;
  };
  std::vector<Placed> placed;
  int width = 160;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto rect = imaging::label_plate_rect(0, 0, text::decode_utf8(labels[i]).size(), kScale);
    const int x = 28 + static_cast<int>(i % 2) * 48;
    const int y = 24 + static_cast<int>(i) * kRowHeight;
    placed.push_back({x, y, rect.width, rect.height});
    width = std::max(width, x + rect.width + 28);
  }
  const int height = 24 + static_cast<int>(labels.size()) * kRowHeight + 16;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "  <rect x=\"8\" y=\"8\" width=\"" << width - 16 << "\" height=\"" << height - 16
      << "\" fill=\"#dbe9f6\" stroke=\"navy\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i + 1 < placed.size(); ++i) {
    const auto& a = placed[i];
    const auto& b = placed[i + 1];
    svg << "  <line x1=\"" << a.x + 20 << "\" y1=\"" << a.y + a.h << "\" x2=\"" << b.x + 20 << "\" y2=\"" << b.y
        << "\" stroke=\"#7a3b10\" stroke-width=\"2\"/>\n";
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    svg << "  <text x=\"" << placed[i].x << "\" y=\"" << placed[i].y << "\" font-size=\"16\">"
        << xml_escape(labels[i]) << "</text>\n";
  }
  json graph{{"nodes", labels}, {"edges", json::array()}};
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) graph["edges"].push_back({labels[i], labels[i + 1]});
  svg << "  <metadata id=\"structure\">" << xml_escape(graph.dump()) << "</metadata>\n</svg>\n";
  return svg.str();
}

std::string TemplateLlm::generate(const std::string& instruction) const {
  if (is_language_choice_prompt(instruction)) return "svg";
  const std::string id = instruction_prompt_id(instruction).value_or("");
  std::vector<std::string> labels = instruction_labels(instruction);
  if (opts_.never_label.contains(id)) {
    labels.clear();
  } else if (!instruction_has_feedback(instruction)) {
    if (auto it = opts_.omit_first_attempt.find(id); it != opts_.omit_first_attempt.end()) {
      std::erase_if(labels, [&](const std::string& l) { return it->second.contains(l); });
    }
  }
  switch (instruction_language(instruction).value_or(RenderLanguage::svg)) {
    case RenderLanguage::python_matplotlib: return template_python(labels);
    case RenderLanguage::latex_tikz: return template_tikz(labels);
    case RenderLanguage::svg: break;
  }
  return template_svg(labels);
}

std::string strip_code_fences(const std::string& response) {
  const auto open = response.find("```");
  if (open == std::string::npos) return response;
  const auto body = response.find('\n', open);
  if (body == std::string::npos) return response;
  const auto close = response.find("```", body + 1);
  return response.substr(body + 1, close == std::string::npos ? std::string::npos : close - body - 1);
}

std::string CommandLlm::generate(const std::string& instruction) const {
  SubprocessSpec spec;
  spec.shell_command = command_;
  spec.stdin_data = instruction;
  spec.inherit_env = true;
  spec.limits.timeout = timeout_;
  spec.limits.isolate_network = false;
  spec.limits.memory_bytes = 0;
  const auto res = run_subprocess(spec);
  if (res.timed_out) throw TimeoutError("LLM command " + name_ + " timed out");
  if (!res.ok()) throw BackendError("LLM command " + name_ + " failed: " + res.describe());
  return strip_code_fences(res.stdout_text);
}

std::string HttpLlm::generate(const std::string& instruction) const {
  httplib::Client client(opts_.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout).count();
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!opts_.api_key_env.empty()) {
    const char* key = std::getenv(opts_.api_key_env.c_str());
    if (!key) throw ConfigError("environment variable " + opts_.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const json body{{"model", opts_.model},
                  {"temperature", opts_.temperature},
                  {"messages", json::array({{{"role", "user"}, {"content", instruction}}})}};
  auto res = client.Post(opts_.path, headers, body.dump(), "application/json");
  if (!res) throw BackendError("LLM request to " + opts_.base_url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("LLM endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return strip_code_fences(json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>());
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected LLM response: ") + e.what());
  }
}

}  // namespace cage::synth
