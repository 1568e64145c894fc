#include "cage/harness/config.hpp"

#include "cage/codec.hpp"
#include "cage/error.hpp"

namespace cage::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

const json& section(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_object()) {
    throw ConfigError(std::string("config is missing the \"") + key + "\" backend section");
  }
  return doc[key];
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
    throw ConfigError(where + "." + key + " must be a non-empty string");
  }
  return j[key].get<std::string>();
}

std::chrono::milliseconds timeout_of(const json& j, long long fallback_ms, const std::string& where) {
  return std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", fallback_ms, where));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::shared_ptr<const synth::LlmBackend> make_llm(const json& j, const fs::path& base) {
  const std::string type = require_string(j, "type", "llm");
  if (type == "template") {
    synth::TemplateLlm::Options o;
    if (j.contains("omit_first_attempt")) {
      for (const auto& [id, labels] : j["omit_first_attempt"].items()) {
        for (const auto& l : labels) o.omit_first_attempt[id].insert(l.get<std::string>());
      }
    }
    if (j.contains("never_label")) {
      for (const auto& id : j["never_label"]) o.never_label.insert(id.get<std::string>());
    }
    return std::make_shared<synth::TemplateLlm>(std::move(o));
  }
  if (type == "scripted") {
    std::map<std::string, std::vector<std::string>> scripts;
    if (!j.contains("scripts") || !j["scripts"].is_object()) throw ConfigError("llm.scripts must be an object");
    for (const auto& [id, responses] : j["scripts"].items()) {
      for (const auto& r : responses) {
        if (r.is_object() && r.contains("file")) {
          scripts[id].push_back(codec::read_text_file(resolve(base, r["file"].get<std::string>()).string()));
        } else {
          scripts[id].push_back(r.get<std::string>());
        }
      }
    }
    return std::make_shared<synth::ScriptedLlm>(std::move(scripts));
  }
  if (type == "command") {
    return std::make_shared<synth::CommandLlm>(get_or<std::string>(j, "name", "command-llm", "llm"),
                                               require_string(j, "command", "llm"), timeout_of(j, 120'000, "llm"));
  }
  if (type == "http") {
    synth::HttpLlm::Options o;
    o.name = get_or<std::string>(j, "name", o.name, "llm");
    o.base_url = require_string(j, "base_url", "llm");
    o.path = get_or<std::string>(j, "path", o.path, "llm");
    o.model = require_string(j, "model", "llm");
    o.api_key_env = get_or<std::string>(j, "api_key_env", "", "llm");
    o.temperature = get_or<double>(j, "temperature", 0.0, "llm");
    o.timeout = timeout_of(j, 120'000, "llm");
    return std::make_shared<synth::HttpLlm>(std::move(o));
  }
  throw ConfigError("unknown llm type: " + type);
}

std::shared_ptr<const synth::RendererBackend> make_renderer(const std::string& lang, const json& j) {
  const std::string where = "renderers." + lang;
  const std::string type = require_string(j, "type", where);
  if (type == "builtin") {
    if (lang != "svg") throw ConfigError(where + ": the builtin renderer only handles svg");
    return std::make_shared<synth::BuiltinSvgRenderer>();
  }
  if (type == "command") {
    return std::make_shared<synth::CommandRenderer>(get_or<std::string>(j, "name", lang, where),
                                                    require_string(j, "command", where),
                                                    get_or<bool>(j, "deterministic", true, where));
  }
  throw ConfigError("unknown renderer type: " + type);
}

std::shared_ptr<const refine::DiffusionBackend> make_diffusion(const json& j) {
  const std::string type = require_string(j, "type", "diffusion");
  if (type == "identity") return std::make_shared<refine::IdentityDiffusion>();
  if (type == "recolor") return std::make_shared<refine::RecolorDiffusion>();
  if (type == "http") {
    refine::HttpDiffusion::Options o;
    o.name = get_or<std::string>(j, "name", o.name, "diffusion");
    o.base_url = require_string(j, "base_url", "diffusion");
    o.path = get_or<std::string>(j, "path", o.path, "diffusion");
    o.api_key_env = get_or<std::string>(j, "api_key_env", "", "diffusion");
    o.timeout = timeout_of(j, 300'000, "diffusion");
    return std::make_shared<refine::HttpDiffusion>(std::move(o));
  }
  if (type == "command") {
    return std::make_shared<refine::CommandDiffusion>(get_or<std::string>(j, "name", "command-diffusion", "diffusion"),
                                                      require_string(j, "command", "diffusion"),
                                                      timeout_of(j, 300'000, "diffusion"));
  }
  throw ConfigError("unknown diffusion type: " + type);
}

std::shared_ptr<const metrics::OcrBackend> make_ocr(const json& j) {
  const std::string type = require_string(j, "type", "ocr");
  if (type == "glyph") return std::make_shared<metrics::GlyphOcr>();
  if (type == "command") {
    return std::make_shared<metrics::CommandOcr>(get_or<std::string>(j, "name", "command-ocr", "ocr"),
                                                 require_string(j, "command", "ocr"), timeout_of(j, 60'000, "ocr"));
  }
  throw ConfigError("unknown ocr type: " + type);
}

std::shared_ptr<const metrics::EmbedderBackend> make_embedder(const json& j) {
  const std::string type = require_string(j, "type", "embedder");
  if (type == "histogram") return std::make_shared<metrics::HistogramEmbedder>(get_or<int>(j, "bins", 4, "embedder"));
  if (type == "command") {
    const int dim = get_or<int>(j, "dimension", 0, "embedder");
    if (dim < 1) throw ConfigError("embedder.dimension must be positive");
    return std::make_shared<metrics::CommandEmbedder>(get_or<std::string>(j, "name", "command-embedder", "embedder"),
                                                      require_string(j, "command", "embedder"), dim,
                                                      timeout_of(j, 60'000, "embedder"));
  }
  throw ConfigError("unknown embedder type: " + type);
}

}  // namespace

json Backends::identities() const {
  json r = json::object();
  for (const auto& [lang, backend] : renderers) r[std::string(synth::to_string(lang))] = backend->name();
  return {{"llm", llm ? llm->name() : ""},
          {"renderers", r},
          {"diffusion", diffusion ? diffusion->name() : ""},
          {"label_renderer", label_renderer ? label_renderer->name() : "pixel-copy"},
          {"ocr", ocr ? ocr->name() : ""},
          {"embedder", embedder ? embedder->name() : ""}};
}

PipelineConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig cfg;
  cfg.source = doc;
  cfg.base_dir = base_dir;
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
  cfg.jobs = get_or<int>(doc, "jobs", 1, "config");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  cfg.runs_dir = resolve(base_dir, get_or<std::string>(doc, "runs_dir", "runs", "config"));
  if (doc.contains("manifest")) cfg.manifest = resolve(base_dir, get_or<std::string>(doc, "manifest", "", "config"));
  if (doc.contains("reference_dir")) {
    cfg.reference_dir = resolve(base_dir, get_or<std::string>(doc, "reference_dir", "", "config"));
  }

  try {
    if (doc.contains("language")) {
      const json& l = doc["language"];
      const std::string mode = get_or<std::string>(l, "mode", "fixed", "language");
      if (mode == "llm") {
        cfg.language.mode = LanguagePolicy::Mode::llm;
      } else if (mode != "fixed") {
        throw ConfigError("language.mode must be fixed or llm");
      }
      cfg.language.fallback = synth::parse_language(get_or<std::string>(l, "default", "svg", "language"));
      if (l.contains("by_subject")) {
        for (const auto& [subject, lang] : l["by_subject"].items()) {
          cfg.language.by_subject[benchmark::parse_subject(subject)] = synth::parse_language(lang.get<std::string>());
        }
      }
    }

    if (doc.contains("canny")) {
      const json& c = doc["canny"];
      cfg.refine.canny.sigma = get_or<double>(c, "sigma", 1.4, "canny");
      cfg.refine.canny.low = get_or<double>(c, "low", 0.1, "canny");
      cfg.refine.canny.high = get_or<double>(c, "high", 0.3, "canny");
    }
    const auto& cp = cfg.refine.canny;
    if (!(cp.sigma > 0 && cp.low > 0 && cp.low < cp.high && cp.high <= 1)) {
      throw ConfigError("canny parameters must satisfy sigma > 0 and 0 < low < high <= 1");
    }
    cfg.refine.mask_padding = get_or<int>(doc, "mask_padding", 2, "config");
    if (cfg.refine.mask_padding < 0) throw ConfigError("mask_padding must be non-negative");
    cfg.refine.composite = imaging::parse_composite_mode(get_or<std::string>(doc, "composite", "pixel-copy", "config"));

    if (doc.contains("style")) {
      const json& s = doc["style"];
      cfg.style_strength = get_or<double>(s, "strength", 0.6, "style");
      if (s.contains("prompt") && !s["prompt"].is_null()) cfg.style_prompt = get_or<std::string>(s, "prompt", "", "style");
      cfg.style_params = get_or<json>(s, "params", json::object(), "style");
    }
    if (!(cfg.style_strength > 0 && cfg.style_strength <= 1)) throw ConfigError("style.strength must be in (0, 1]");

    cfg.max_attempts = get_or<int>(doc, "max_attempts", 3, "config");
    if (cfg.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");

    if (doc.contains("limits")) {
      const json& l = doc["limits"];
      cfg.limits.timeout = std::chrono::milliseconds(get_or<long long>(l, "timeout_ms", 30'000, "limits"));
      cfg.limits.max_output_px = get_or<long long>(l, "max_output_px", cfg.limits.max_output_px, "limits");
      cfg.limits.memory_bytes = get_or<std::uint64_t>(l, "memory_mb", 4096, "limits") << 20;
      cfg.limits.require_network_isolation = get_or<bool>(l, "require_network_isolation", false, "limits");
    }

    if (doc.contains("cer_matching")) {
      const auto m = get_or<std::string>(doc, "cer_matching", "independent", "config");
      if (m == "assignment") {
        cfg.cer_matching = metrics::CerMatching::assignment;
      } else if (m != "independent") {
        throw ConfigError("cer_matching must be independent or assignment");
      }
    }

    if (doc.contains("review")) {
      const json& r = doc["review"];
      auto& rc = cfg.review;
      rc.port = get_or<int>(r, "port", rc.port, "review");
      rc.host = get_or<std::string>(r, "host", rc.host, "review");
      rc.queue_dir = resolve(base_dir, get_or<std::string>(r, "queue_dir", "review", "review"));
      rc.pairs_store = resolve(base_dir, get_or<std::string>(r, "pairs_store", "pairs", "review"));
      rc.strengths = get_or<std::vector<double>>(r, "strengths", rc.strengths, "review");
      rc.lease_seconds = get_or<int>(r, "lease_seconds", rc.lease_seconds, "review");
      rc.iou_threshold = get_or<double>(r, "iou_threshold", rc.iou_threshold, "review");
    } else {
      cfg.review.queue_dir = base_dir / "review";
      cfg.review.pairs_store = base_dir / "pairs";
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  // Backend sections are validated eagerly so errors surface before a run.
  (void)make_backends(cfg);
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = codec::read_text_file(path.string());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  return parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

Backends make_backends(const PipelineConfig& cfg) {
  const json& doc = cfg.source;
    Backends b;
  try {
    b.llm = make_llm(section(doc, "llm"), cfg.base_dir);
    b.diffusion = make_diffusion(section(doc, "diffusion"));
    b.ocr = make_ocr(section(doc, "ocr"));
    b.embedder = make_embedder(section(doc, "embedder"));
    if (doc.contains("renderers")) {
      for (const auto& [lang, spec] : doc["renderers"].items()) {
        b.renderers[synth::parse_language(lang)] = make_renderer(lang, spec);
      }
    } else {
      b.renderers[synth::RenderLanguage::svg] = std::make_shared<synth::BuiltinSvgRenderer>();
    }
    if (doc.contains("label_renderer") && !doc["label_renderer"].is_null()) {
      const auto name = doc["label_renderer"].get<std::string>();
      if (name != "plate") throw ConfigError("unknown label_renderer: " + name);
      b.label_renderer = std::make_shared<refine::PlateLabelRenderer>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed backend section: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  auto need = [&](synth::RenderLanguage l) {
    if (!b.renderers.contains(l)) {
      throw ConfigError("no renderer configured for " + std::string(synth::to_string(l)));
    }
  };
  if (cfg.language.mode == LanguagePolicy::Mode::fixed) {
    need(cfg.language.fallback);
    for (const auto& [subject, lang] : cfg.language.by_subject) need(lang);
  }
  return b;
}

json mock_config_json() {
  return {{"seed", 7},
          {"jobs", 1},
          {"runs_dir", "runs"},
          {"llm", {{"type", "template"}}},
          {"renderers", {{"svg", {{"type", "builtin"}}}}},
          {"language", {{"mode", "fixed"}, {"default", "svg"}}},
          {"diffusion", {{"type", "recolor"}}},
          {"ocr", {{"type", "glyph"}}},
          {"embedder", {{"type", "histogram"}, {"bins", 4}}},
          {"canny", {{"sigma", 1.4}, {"low", 0.1}, {"high", 0.3}}},
          {"mask_padding", 2},
          {"composite", "pixel-copy"},
          {"style", {{"strength", 0.6}}},
          {"max_attempts", 3}};
}

}  // namespace cage::harness
