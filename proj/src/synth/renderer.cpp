#include "cage/synth/renderer.hpp"

#include <chrono>
#include <filesystem>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/imaging/png_io.hpp"
#include "cage/subprocess.hpp"
#include "cage/synth/svg_renderer.hpp"

namespace cage::synth {

namespace fs = std::filesystem;

RenderOutput BuiltinSvgRenderer::render(const CodeArtifact& artifact, const RenderLimits& limits) const {
  if (artifact.language != RenderLanguage::svg) {
    throw BackendError("builtin-svg cannot execute " + std::string(to_string(artifact.language)) + " sources");
  }
  try {
    SvgRender r = render_svg(artifact.source, limits.max_output_px);
    RenderOutput out;
    out.image = std::move(r.image);
    out.regions = std::move(r.regions);
    out.structure = std::move(r.structure);
    return out;
  } catch (const ParseError& e) {
    throw BackendError(std::string("svg render failed: ") + e.what());
  } catch (const ValidationError& e) {
    throw BackendError(std::string("svg render failed: ") + e.what());
  }
}

RenderOutput CommandRenderer::render(const CodeArtifact& artifact, const RenderLimits& limits) const {
  TempDir work("cage-render");
  const fs::path source = work.path() / ("code." + std::string(source_extension(artifact.language)));
  const fs::path output = work.path() / "prog.png";
  codec::write_file(source.string(), artifact.source);

  SubprocessSpec spec;
  spec.shell_command = expand_command_template(
      template_, {{"source", source.string()}, {"output", output.string()}, {"workdir", work.path().string()}});
  spec.working_dir = work.path();
  spec.env["MPLBACKEND"] = "Agg";
  spec.limits.timeout = limits.timeout;
  spec.limits.memory_bytes = limits.memory_bytes;
  spec.limits.isolate_network = true;
  spec.limits.require_network_isolation = limits.require_network_isolation;
  const SubprocessResult res = run_subprocess(spec);

  if (res.timed_out) {
    throw TimeoutError("renderer " + name_ + " timed out after " + std::to_string(limits.timeout.count()) + " ms");
  }
  if (!res.ok()) throw BackendError("renderer " + name_ + " failed: " + res.describe());
  if (!fs::exists(output)) throw BackendError("renderer " + name_ + " wrote no image to " + output.filename().string());

  RenderOutput out;
  try {
    out.image = imaging::decode_png(codec::read_file(output.string()));
  } catch (const ParseError& e) {
    throw ParseError("undecodable renderer output " + output.filename().string() + ": " + e.what());
  }
  if (fs::exists(work.path() / "regions.json")) {
    out.regions = regions_from_json(nlohmann::json::parse(codec::read_text_file((work.path() / "regions.json").string()),
                                                          nullptr, false));
  }
  if (fs::exists(work.path() / "structure.json")) {
    const auto j = nlohmann::json::parse(codec::read_text_file((work.path() / "structure.json").string()), nullptr, false);
    if (j.is_discarded()) throw BackendError("structure.json is not valid JSON");
    out.structure = structure_from_json(j);
  }
  out.stdout_text = res.stdout_text;
  out.stderr_text = res.stderr_text;
  if (!res.network_isolated) out.stderr_text += "\n[cage] warning: network namespace isolation unavailable\n";
  return out;
}

RenderOutput ScriptedRenderer::render(const CodeArtifact& artifact, const RenderLimits&) const {
  if (fn_) return fn_(artifact);
  return fixed_;
}

RenderOutput render(const CodeArtifact& artifact, const RendererBackend& renderer, const RenderLimits& limits) {
  if (artifact.source.empty()) throw ValidationError("cannot render an empty source");
  const auto started = std::chrono::steady_clock::now();
  RenderOutput out = renderer.render(artifact, limits);
  if (out.image.empty()) throw BackendError("renderer " + renderer.name() + " returned no image");
  if (static_cast<long long>(out.image.width()) * out.image.height() > limits.max_output_px) {
    throw BackendError("rendered image " + std::to_string(out.image.width()) + "x" +
                       std::to_string(out.image.height()) + " exceeds the output pixel limit");
  }
  for (const auto& r : out.regions) {
    const auto& b = r.bbox;
    if (b.width <= 0 || b.height <= 0 || b.x < 0 || b.y < 0 || b.x + b.width > out.image.width() ||
        b.y + b.height > out.image.height()) {
      throw BackendError("text region \"" + r.text + "\" lies outside the rendered image");
    }
  }
  out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace cage::synth
