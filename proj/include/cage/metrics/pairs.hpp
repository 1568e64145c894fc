#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/imaging/raster.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/synth/types.hpp"

namespace cage::metrics {

struct Box {
  double x = 0, y = 0, width = 0, height = 0;
};

// Intersection over union. Throws ValidationError on a non-positive area.
double bbox_iou(const Box& a, const Box& b);
double bbox_iou(const imaging::PixelRect& a, const imaging::PixelRect& b);

enum class VisualStatus { pass, fail, pending_human };
enum class PairOverall { accepted, rejected, pending };

std::string_view to_string(VisualStatus s);
std::string_view to_string(PairOverall s);
VisualStatus parse_visual_status(std::string_view s);

struct LabelPlacement {
  std::string text;
  double best_iou = 0.0;
};

struct PairVerification {
  bool labels_preserved = false;
  std::vector<std::string> expected_labels;
  std::vector<std::string> missing_labels;
  std::vector<std::string> ocr_tokens;  // what OCR read on the candidate
  bool topology_ok = false;
  double min_iou = 0.0;
  double iou_threshold = 0.5;
  std::vector<LabelPlacement> placements;
  VisualStatus visual = VisualStatus::pending_human;

  // accepted only with both automated checks and a human visual pass.
  PairOverall overall() const;
};

nlohmann::json to_json(const PairVerification& v);
PairVerification pair_verification_from_json(const nlohmann::json& j);

inline constexpr double kDefaultIouThreshold = 0.5;

// Automated criteria (1) and (2) for a (prog, candidate) pair. Expected labels
// and positions come from the renderer's regions; without regions they are
// read from the prog image by the same OCR backend. Each expected label is
// matched to the candidate OCR token with the same (folded) text and the
// highest IoU; a label with no such token scores 0.
PairVerification verify_pair(const synth::RenderOutput& prog, const imaging::RasterImage& styled,
                             const OcrBackend& ocr, double iou_threshold = kDefaultIouThreshold);

}  // namespace cage::metrics
