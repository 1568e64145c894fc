#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cage {

struct SandboxLimits {
  std::chrono::milliseconds timeout{30'000};
  std::uint64_t memory_bytes = 4ULL << 30;
  std::uint64_t max_file_bytes = 256ULL << 20;
  // Attempt a private network namespace. When `require_network_isolation` is
  // set and the namespace cannot be created, the child is not started.
  bool isolate_network = true;
  bool require_network_isolation = false;
};

struct SubprocessSpec {
  // Run through `/bin/sh -c` when `argv` is empty.
  std::string shell_command;
  std::vector<std::string> argv;
  std::filesystem::path working_dir;
  std::string stdin_data;
  std::map<std::string, std::string> env;
  // Inherit the parent's environment on top of `env`. Sandboxed renders start
  // from an empty environment.
  bool inherit_env = false;
  SandboxLimits limits;
};

struct SubprocessResult {
  int exit_code = -1;
  int term_signal = 0;
  bool timed_out = false;
  bool network_isolated = false;
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds wall{0};

  bool ok() const { return !timed_out && term_signal == 0 && exit_code == 0; }
  // One-line summary used in error messages and verification feedback.
  std::string describe() const;
};

SubprocessResult run_subprocess(const SubprocessSpec& spec);

// Replaces every `{key}` in `tmpl` with the mapped value. Values are shell-quoted.
std::string expand_command_template(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values);
std::string shell_quote(const std::string& s);

// Owns a freshly created directory under the system temp dir and removes it on
// destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "cage");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  TempDir(TempDir&& other) noexcept;
  TempDir& operator=(TempDir&& other) noexcept;

  const std::filesystem::path& path() const { return path_; }
  void keep() { keep_ = true; }

 private:
  std::filesystem::path path_;
  bool keep_ = false;
};

}  // namespace cage
