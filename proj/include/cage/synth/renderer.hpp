#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

#include "cage/synth/types.hpp"

namespace cage::synth {

struct RenderLimits {
  std::chrono::milliseconds timeout{30'000};
  long long max_output_px = 16'777'216;
  std::uint64_t memory_bytes = 4ULL << 30;
  bool require_network_isolation = false;
};

// Executes an artifact and returns the raster plus any label-position and
// structure sidecars. Implementations must be callable from several threads.
class RendererBackend {
 public:
  virtual ~RendererBackend() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  // Throws TimeoutError, BackendError (failed execution, with transcript) or
  // ParseError (undecodable output).
  virtual RenderOutput render(const CodeArtifact& artifact, const RenderLimits& limits) const = 0;
};

// In-process rasterizer for the svg language (see svg_renderer.hpp).
class BuiltinSvgRenderer final : public RendererBackend {
 public:
  std::string name() const override { return "builtin-svg"; }
  bool deterministic() const override { return true; }
  RenderOutput render(const CodeArtifact& artifact, const RenderLimits& limits) const override;
};

// Runs a shell command template inside the sandbox. Placeholders:
//   {source}  path of the written source file (code.<ext>)
//   {output}  path the command must write the PNG to (prog.png)
//   {workdir} the isolated working directory
// After exit, `regions.json` and `structure.json` in the working directory are
// picked up when present.
class CommandRenderer final : public RendererBackend {
 public:
  CommandRenderer(std::string name, std::string command_template, bool deterministic = true)
      : name_(std::move(name)), template_(std::move(command_template)), deterministic_(deterministic) {}
  std::string name() const override { return name_; }
  bool deterministic() const override { return deterministic_; }
  RenderOutput render(const CodeArtifact& artifact, const RenderLimits& limits) const override;

 private:
  std::string name_;
  std::string template_;
  bool deterministic_;
};

// Test double: returns a fixed output, or whatever the callback produces.
class ScriptedRenderer final : public RendererBackend {
 public:
  explicit ScriptedRenderer(RenderOutput fixed) : fixed_(std::move(fixed)) {}
  explicit ScriptedRenderer(std::function<RenderOutput(const CodeArtifact&)> fn) : fn_(std::move(fn)) {}
  std::string name() const override { return "scripted"; }
  bool deterministic() const override { return true; }
  RenderOutput render(const CodeArtifact& artifact, const RenderLimits& limits) const override;

 private:
  RenderOutput fixed_;
  std::function<RenderOutput(const CodeArtifact&)> fn_;
};

// Checks the artifact, invokes the backend, enforces the output pixel limit
// and region bounds, and records wall time.
RenderOutput render(const CodeArtifact& artifact, const RendererBackend& renderer, const RenderLimits& limits = {});

}  // namespace cage::synth
