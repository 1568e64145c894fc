#include "cage/metrics/pairs.hpp"

#include <algorithm>

#include "cage/error.hpp"
#include "cage/metrics/text_metrics.hpp"
#include "cage/text.hpp"

namespace cage::metrics {

double bbox_iou(const Box& a, const Box& b) {
  if (a.width <= 0 || a.height <= 0 || b.width <= 0 || b.height <= 0) {
    throw ValidationError("bounding boxes must have positive area");
  }
  const double iw = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
  const double inter = iw * ih;
  return inter / (a.width * a.height + b.width * b.height - inter);
}

double bbox_iou(const imaging::PixelRect& a, const imaging::PixelRect& b) {
  return bbox_iou(Box{double(a.x), double(a.y), double(a.width), double(a.height)},
                  Box{double(b.x), double(b.y), double(b.width), double(b.height)});
}

std::string_view to_string(VisualStatus s) {
  switch (s) {
    case VisualStatus::pass: return "pass";
    case VisualStatus::fail: return "fail";
    case VisualStatus::pending_human: return "pending-human";
  }
  return "pending-human";
}

std::string_view to_string(PairOverall s) {
  switch (s) {
    case PairOverall::accepted: return "accepted";
    case PairOverall::rejected: return "rejected";
    case PairOverall::pending: return "pending";
  }
  return "pending";
}

VisualStatus parse_visual_status(std::string_view s) {
  if (s == "pass") return VisualStatus::pass;
  if (s == "fail") return VisualStatus::fail;
  if (s == "pending-human") return VisualStatus::pending_human;
  throw ParseError("unknown visual status: " + std::string(s));
}

PairOverall PairVerification::overall() const {
  if (!labels_preserved || !topology_ok || visual == VisualStatus::fail) return PairOverall::rejected;
  return visual == VisualStatus::pass ? PairOverall::accepted : PairOverall::pending;
}

nlohmann::json to_json(const PairVerification& v) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& p : v.placements) placements.push_back({{"text", p.text}, {"best_iou", p.best_iou}});
  return {{"labels_preserved", v.labels_preserved},
          {"expected_labels", v.expected_labels},
          {"missing_labels", v.missing_labels},
          {"ocr_tokens", v.ocr_tokens},
          {"topology_ok", v.topology_ok},
          {"min_iou", v.min_iou},
          {"iou_threshold", v.iou_threshold},
          {"placements", placements},
          {"visual", to_string(v.visual)},
          {"overall", to_string(v.overall())}};
}

PairVerification pair_verification_from_json(const nlohmann::json& j) {
  PairVerification v;
  try {
    v.labels_preserved = j.at("labels_preserved").get<bool>();
    v.expected_labels = j.at("expected_labels").get<std::vector<std::string>>();
    v.missing_labels = j.at("missing_labels").get<std::vector<std::string>>();
    v.ocr_tokens = j.at("ocr_tokens").get<std::vector<std::string>>();
    v.topology_ok = j.at("topology_ok").get<bool>();
    v.min_iou = j.at("min_iou").get<double>();
    v.iou_threshold = j.at("iou_threshold").get<double>();
    for (const auto& p : j.at("placements")) {
      v.placements.push_back({p.at("text").get<std::string>(), p.at("best_iou").get<double>()});
    }
    v.visual = parse_visual_status(j.at("visual").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed pair verification: ") + e.what());
  }
  return v;
}

PairVerification verify_pair(const synth::RenderOutput& prog, const imaging::RasterImage& styled,
                             const OcrBackend& ocr, double iou_threshold) {
  std::vector<imaging::TextRegion> expected = prog.regions;
  if (expected.empty()) {
    for (auto& t : ocr.recognize(prog.image).tokens) expected.push_back({std::move(t.text), t.bbox});
  }
  const OcrResult read = ocr.recognize(styled);

  PairVerification v;
  v.iou_threshold = iou_threshold;
  for (const auto& r : expected) {
    if (std::find(v.expected_labels.begin(), v.expected_labels.end(), r.text) == v.expected_labels.end()) {
      v.expected_labels.push_back(r.text);
    }
  }
  for (const auto& t : read.tokens) v.ocr_tokens.push_back(t.text);
  v.missing_labels = missing_labels(v.expected_labels, read);
  v.labels_preserved = !v.expected_labels.empty() && v.missing_labels.empty();

  v.min_iou = expected.empty() ? 0.0 : 1.0;
  for (const auto& r : expected) {
    const std::string key = text::fold(r.text);
    double best = 0.0;
    for (const auto& t : read.tokens) {
      if (text::fold(t.text) != key || t.bbox.width <= 0 || t.bbox.height <= 0) continue;
      best = std::max(best, bbox_iou(r.bbox, t.bbox));
    }
    v.placements.push_back({r.text, best});
    v.min_iou = std::min(v.min_iou, best);
  }
  v.topology_ok = !expected.empty() && v.min_iou >= iou_threshold;
  return v;
}

}  // namespace cage::metrics
