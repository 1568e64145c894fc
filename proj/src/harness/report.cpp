#include "cage/harness/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "cage/error.hpp"

namespace cage::harness {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kParadigms = {{
    {"open-source-diffusion", "Open-src. diffusion"},
    {"code-based", "Code-based (LLM→code)"},
    {"closed-source-api", "Closed-src. APIs"},
    {"cage", "Ours"},
}};

std::size_t paradigm_rank(std::string_view p) {
  for (std::size_t i = 0; i < kParadigms.size(); ++i) {
    if (kParadigms[i].first == p) return i;
  }
  return kParadigms.size();
}

std::string fixed1(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", *v);
  return buf;
}

std::string row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

}  // namespace

ReportLayout parse_report_layout(std::string_view name) {
  if (name == "accuracy-table") return ReportLayout::accuracy_table;
  if (name == "cost-table") return ReportLayout::cost_table;
  throw ConfigError("unknown report layout: " + std::string(name));
}

std::string paradigm_label(std::string_view paradigm) {
  for (const auto& [key, label] : kParadigms) {
    if (key == paradigm) return std::string(label);
  }
  return std::string(paradigm);
}

std::string render_report(std::vector<MetricReport> reports, ReportLayout layout, const CostTableOptions& cost) {
  std::stable_sort(reports.begin(), reports.end(), [](const MetricReport& a, const MetricReport& b) {
    const auto ra = paradigm_rank(a.paradigm), rb = paradigm_rank(b.paradigm);
    if (ra != rb) return ra < rb;
    if (a.paradigm != b.paradigm) return a.paradigm < b.paradigm;
    if (a.order != b.order) return a.order < b.order;
    return a.model < b.model;
  });

  std::ostringstream out;
  if (layout == ReportLayout::accuracy_table) {
    out << row({"Paradigm", "Model", "LEM↑", "CER↓", "FID↓", "HVA↑", "$/img"})
        << "|---|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : reports) {
      out << row({paradigm_label(r.paradigm), r.model, fixed1(r.lem), fixed1(r.cer), fixed1(r.fid), fixed1(r.hva),
                  r.cost_per_image ? r.cost_per_image->to_string() : "n/a"});
    }
    return out.str();
  }

  std::vector<const MetricReport*> cols;
  for (const auto& r : reports) {
    if (r.cost_per_image && r.cost_per_image->micros() > 0) cols.push_back(&r);
  }
  std::vector<std::string> header{"Scenario"};
  std::string align = "|---|";
  for (const auto* c : cols) {
    header.push_back(c->model);
    align += "---:|";
  }
  out << row(header) << align << "\n";

  std::vector<metrics::CostBreakdown> nominal;
  for (const auto* c : cols) {
    auto s = cost.scenario;
    s.per_image = *c->cost_per_image;
    s.regen_rate = 0.0;
    nominal.push_back(metrics::effective_cost(s));
  }
  auto cost_row = [&](const std::string& label, auto cell) {
    std::vector<std::string> cells{label};
    for (std::size_t i = 0; i < cols.size(); ++i) cells.push_back(cell(i));
    out << row(cells);
  };
  cost_row("Per image ($)", [&](std::size_t i) { return cols[i]->cost_per_image->format(3); });
  cost_row("Per deck ($)", [&](std::size_t i) { return nominal[i].per_deck.format(2); });
  cost_row("Teacher/yr ($)", [&](std::size_t i) { return nominal[i].per_teacher_year.format(2); });
  cost_row("School/yr ($)", [&](std::size_t i) { return nominal[i].per_school_year.format(0, true); });

  const double lo = metrics::retry_multiplier(cost.regen_low, cost.retry_model);
  const double hi = metrics::retry_multiplier(cost.regen_high, cost.retry_model);
  std::string band = fixed1(lo);
  if (fixed1(hi) != band) band += "–" + fixed1(hi);
  std::vector<std::string> eff{"Eff. cost ($)", band + "× above"};
  for (std::size_t i = 1; i < cols.size(); ++i) eff.push_back("");
  if (!cols.empty()) out << row(eff);
  return out.str();
}

std::string render_subject_table(const MetricReport& report) {
  std::ostringstream out;
  out << row({"Subject", "Images", "Labels", "LEM↑", "CER↓"}) << "|---|---:|---:|---:|---:|\n";
  for (const auto& [subject, t] : report.per_subject) {
    out << row({subject, std::to_string(t.images), std::to_string(t.labels), fixed1(t.lem_percent()),
                fixed1(t.cer_percent())});
  }
  return out.str();
}

}  // namespace cage::harness
