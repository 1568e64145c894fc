#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cage/benchmark/manifest.hpp"
#include "cage/metrics/embedder.hpp"
#include "cage/metrics/ocr.hpp"
#include "cage/metrics/text_metrics.hpp"
#include "cage/refine/diffusion.hpp"
#include "cage/refine/request.hpp"
#include "cage/synth/llm.hpp"
#include "cage/synth/renderer.hpp"

namespace cage::harness {

// How each prompt's rendering language is picked.
struct LanguagePolicy {
  enum class Mode { fixed, llm };
  Mode mode = Mode::fixed;
  synth::RenderLanguage fallback = synth::RenderLanguage::svg;
  std::map<benchmark::Subject, synth::RenderLanguage> by_subject;
};

struct ReviewConfig {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::filesystem::path queue_dir = "review";
  std::filesystem::path pairs_store = "pairs";
  std::vector<double> strengths{0.4, 0.7};
  int lease_seconds = 600;
  double iou_threshold = 0.5;
};

struct PipelineConfig {
  nlohmann::json source;  // the document as loaded, snapshotted into each run
  std::filesystem::path base_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path runs_dir = "runs";
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> reference_dir;
  LanguagePolicy language;
  refine::RefineConfig refine;
  double style_strength = 0.6;
  std::optional<std::string> style_prompt;
  nlohmann::json style_params = nlohmann::json::object();
  int max_attempts = 3;
  synth::RenderLimits limits;
  metrics::CerMatching cer_matching = metrics::CerMatching::independent;
  ReviewConfig review;
};

struct Backends {
  std::shared_ptr<const synth::LlmBackend> llm;
  std::map<synth::RenderLanguage, std::shared_ptr<const synth::RendererBackend>> renderers;
  std::shared_ptr<const refine::DiffusionBackend> diffusion;
  std::shared_ptr<const refine::LabelRenderer> label_renderer;  // null: copy label pixels
  std::shared_ptr<const metrics::OcrBackend> ocr;
  std::shared_ptr<const metrics::EmbedderBackend> embedder;

  nlohmann::json identities() const;
};

// Throws ConfigError on unknown keys' values, bad types or missing sections.
// Relative paths resolve against `base_dir`.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

// Instantiates every backend named in the config. A missing diffusion,
// llm, ocr or embedder section is a ConfigError.
Backends make_backends(const PipelineConfig& cfg);

// A small all-mock configuration: template LLM, builtin svg renderer,
// recolor diffusion, glyph OCR, histogram embedder.
nlohmann::json mock_config_json();

}  // namespace cage::harness
