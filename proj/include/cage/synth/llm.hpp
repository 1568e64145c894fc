#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace cage::synth {

// Code-generation model contract. generate() may be called concurrently.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  virtual std::string generate(const std::string& instruction) const = 0;
};

// Replays scripted responses keyed by the instruction's diagram id ("*" is the
// fallback script). The n-th call for a key returns the n-th response; the
// last response repeats once the script runs out.
class ScriptedLlm final : public LlmBackend {
 public:
  using Scripts = std::map<std::string, std::vector<std::string>>;
  explicit ScriptedLlm(Scripts scripts) : scripts_(std::move(scripts)) {}
  std::string name() const override { return "scripted"; }
  bool deterministic() const override { return true; }
  std::string generate(const std::string& instruction) const override;
  std::size_t calls(const std::string& key) const;

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::size_t> counters_;
};

// Deterministic mock that lays out every required label from the instruction
// as a chained diagram in the requested language (svg, matplotlib or TikZ).
// `omit_first_attempt` drops the named labels for a diagram id until the
// instruction carries feedback; `never_label` ids never receive any label.
class TemplateLlm final : public LlmBackend {
 public:
  struct Options {
    std::map<std::string, std::set<std::string>> omit_first_attempt;
    std::set<std::string> never_label;
  };
  TemplateLlm() = default;
  explicit TemplateLlm(Options opts) : opts_(std::move(opts)) {}
  std::string name() const override { return "template"; }
  bool deterministic() const override { return true; }
  std::string generate(const std::string& instruction) const override;

 private:
  Options opts_;
};

// Lays out labels as an SVG diagram accepted by the builtin renderer.
std::string template_svg(const std::vector<std::string>& labels);

// Runs a shell command with the instruction on stdin; stdout is the source.
class CommandLlm final : public LlmBackend {
 public:
  CommandLlm(std::string name, std::string command, std::chrono::milliseconds timeout)
      : name_(std::move(name)), command_(std::move(command)), timeout_(timeout) {}
  std::string name() const override { return name_; }
  bool deterministic() const override { return false; }
  std::string generate(const std::string& instruction) const override;

 private:
  std::string name_;
  std::string command_;
  std::chrono::milliseconds timeout_;
};

// OpenAI-compatible chat-completions endpoint. The API key is read from the
// environment variable named by `api_key_env` at call time.
class HttpLlm final : public LlmBackend {
 public:
  struct Options {
    std::string name = "http-llm";
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;
    double temperature = 0.0;
    std::chrono::milliseconds timeout{120'000};
  };
  explicit HttpLlm(Options opts) : opts_(std::move(opts)) {}
  std::string name() const override { return opts_.name; }
  bool deterministic() const override { return false; }
  std::string generate(const std::string& instruction) const override;

 private:
  Options opts_;
};

// Returns the body of the first fenced code block, or the text unchanged.
std::string strip_code_fences(const std::string& response);

}  // namespace cage::synth
