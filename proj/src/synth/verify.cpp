#include <algorithm>
#include <map>
#include <set>

#include "cage/synth/codegen.hpp"
#include "cage/text.hpp"

namespace cage::synth {

std::pair<bool, std::string> check_structure(const StructureGraph& graph) {
  if (graph.nodes.empty()) return {false, "structure graph has no nodes"};
  std::map<std::string, std::size_t> index;
  for (const auto& n : graph.nodes) index.emplace(n, index.size());
  std::vector<std::vector<std::size_t>> adj(index.size());
  for (const auto& [a, b] : graph.edges) {
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      return {false, "edge references unknown node " + (ia == index.end() ? a : b)};
    }
    adj[ia->second].push_back(ib->second);
    adj[ib->second].push_back(ia->second);
  }
  std::vector<int> component(index.size(), -1);
  int next = 0;
  std::vector<std::string> names(index.size());
  for (const auto& [name, i] : index) names[i] = name;
  for (std::size_t start = 0; start < index.size(); ++start) {
    if (component[start] >= 0) continue;
    std::vector<std::size_t> queue{start};
    component[start] = next;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      for (std::size_t n : adj[queue[q]]) {
        if (component[n] < 0) {
          component[n] = next;
          queue.push_back(n);
        }
      }
    }
    ++next;
  }
  if (next == 1) return {true, "connected (" + std::to_string(index.size()) + " nodes)"};
  const int root = component[index.at(graph.nodes.front())];
  std::map<int, std::vector<std::string>> others;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (component[i] != root) others[component[i]].push_back(names[i]);
  }
  std::vector<std::string> parts;
  for (auto& [c, members] : others) {
    std::sort(members.begin(), members.end());
    parts.push_back("{" + text::join(members, ", ") + "}");
  }
  std::sort(parts.begin(), parts.end());
  return {false, "graph is not connected; unreachable components: " + text::join(parts, " ")};
}

VerificationResult verify_code(const CodeArtifact& artifact, const benchmark::DiagramPrompt& prompt,
                               const RenderAttempt* render) {
  VerificationResult v;
  std::set<std::string> extracted;
  for (const auto& l : artifact.extracted_labels) extracted.insert(text::fold(l));
  for (const auto& l : prompt.labels) {
    if (!extracted.contains(text::fold(l))) v.missing_labels.push_back(l);
  }
  if (artifact.extraction_error) v.warnings.push_back("label extraction failed: " + *artifact.extraction_error);
  v.labels_ok = v.missing_labels.empty() && !artifact.extraction_error;

  if (!render) {
    v.executes_ok = false;
    v.execution_error = "code was not executed";
  } else if (!render->output) {
    v.executes_ok = false;
    v.execution_error = render->error.empty() ? "renderer produced no output" : render->error;
  } else {
    v.executes_ok = true;
  }

  if (v.executes_ok && render->output->structure) {
    const auto [ok, detail] = check_structure(*render->output->structure);
    v.structure = ok ? StructureStatus::pass : StructureStatus::fail;
    v.structure_detail = detail;
  } else {
    v.structure = StructureStatus::skipped;
    v.structure_detail = "no structure sidecar";
    if (v.executes_ok) v.warnings.push_back("structure check skipped: no structure sidecar");
  }

  if (v.executes_ok) {
    for (const auto& r : render->output->regions) {
      if (!extracted.contains(text::fold(r.text))) {
        v.warnings.push_back("rendered region \"" + r.text + "\" does not come from a label call");
      }
    }
  }
  return v;
}

}  // namespace cage::synth
