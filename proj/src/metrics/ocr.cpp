#include "cage/metrics/ocr.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cage/error.hpp"
#include "cage/imaging/glyph_font.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/subprocess.hpp"

namespace cage::metrics {

std::string OcrResult::concatenated_text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

OcrResult GlyphOcr::recognize(const imaging::RasterImage& image) const {
  auto plates = imaging::read_label_plates(image);
  std::sort(plates.begin(), plates.end(), [](const auto& a, const auto& b) {
    return a.bbox.y != b.bbox.y ? a.bbox.y < b.bbox.y : a.bbox.x < b.bbox.x;
  });
  OcrResult out;
  for (auto& p : plates) out.tokens.push_back({std::move(p.text), p.bbox});
  return out;
}

OcrResult ocr_result_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("tokens") || !j["tokens"].is_array()) {
    throw BackendError("OCR output is not a token list");
  }
  OcrResult out;
  try {
    for (const auto& t : j["tokens"]) {
      const auto& b = t.at("bbox");
      out.tokens.push_back({t.at("text").get<std::string>(),
                            {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed OCR token: ") + e.what());
  }
  return out;
}

OcrResult CommandOcr::recognize(const imaging::RasterImage& image) const {
  TempDir dir("cage-ocr");
  const auto png = dir.path() / "image.png";
  imaging::write_png(png, image);
  SubprocessSpec spec;
  spec.shell_command = expand_command_template(template_, {{"image", png.string()}});
  spec.working_dir = dir.path();
  spec.inherit_env = true;
  spec.limits.timeout = timeout_;
  spec.limits.isolate_network = false;
  spec.limits.memory_bytes = 0;
  const auto res = run_subprocess(spec);
  if (res.timed_out) throw TimeoutError("OCR command " + name_ + " timed out");
  if (!res.ok()) throw BackendError("OCR command " + name_ + " failed: " + res.describe());
  return ocr_result_from_json(res.stdout_text);
}

}  // namespace cage::metrics
