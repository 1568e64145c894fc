#include "cage/subprocess.hpp"

#include <fcntl.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "cage/codec.hpp"
#include "cage/error.hpp"

extern char** environ;

namespace cage {

namespace fs = std::filesystem;

namespace {

std::string make_temp_file(std::string_view tag) {
  std::string tmpl = (fs::temp_directory_path() / ("cage-" + std::string(tag) + "-XXXXXX")).string();
  int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw IoError("mkstemp failed: " + std::string(std::strerror(errno)));
  ::close(fd);
  return tmpl;
}

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w <= 0) return;
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Only async-signal-safe calls between fork and exec.
[[noreturn]] void child_exec(const SubprocessSpec& spec, char* const* argv, char* const* envp,
                             const char* in_path, const char* out_path, const char* err_path,
                             const std::string& uid_map, const std::string& gid_map, int status_fd) {
  ::setpgid(0, 0);

  char isolated = 0;
  if (spec.limits.isolate_network) {
    if (::unshare(CLONE_NEWNET) == 0) {
      isolated = 1;
    } else if (::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0) {
      int fd = ::open("/proc/self/setgroups", O_WRONLY);
      if (fd >= 0) {
        write_all(fd, "deny", 4);
        ::close(fd);
      }
      fd = ::open("/proc/self/uid_map", O_WRONLY);
      if (fd >= 0) {
        write_all(fd, uid_map.data(), uid_map.size());
        ::close(fd);
      }
      fd = ::open("/proc/self/gid_map", O_WRONLY);
      if (fd >= 0) {
        write_all(fd, gid_map.data(), gid_map.size());
        ::close(fd);
      }
      isolated = 1;
    }
  }
  write_all(status_fd, &isolated, 1);
  if (spec.limits.require_network_isolation && !isolated) ::_exit(126);

  const auto cpu_seconds = static_cast<rlim_t>(spec.limits.timeout.count() / 1000 + 2);
  rlimit cpu{cpu_seconds, cpu_seconds + 1};
  ::setrlimit(RLIMIT_CPU, &cpu);
  if (spec.limits.memory_bytes) {
    rlimit mem{spec.limits.memory_bytes, spec.limits.memory_bytes};
    ::setrlimit(RLIMIT_AS, &mem);
  }
  if (spec.limits.max_file_bytes) {
    rlimit fsz{spec.limits.max_file_bytes, spec.limits.max_file_bytes};
    ::setrlimit(RLIMIT_FSIZE, &fsz);
  }
  rlimit core{0, 0};
  ::setrlimit(RLIMIT_CORE, &core);

  if (!spec.working_dir.empty() && ::chdir(spec.working_dir.c_str()) != 0) ::_exit(127);

  int in = ::open(in_path, O_RDONLY);
  int out = ::open(out_path, O_WRONLY | O_TRUNC);
  int err = ::open(err_path, O_WRONLY | O_TRUNC);
  if (in < 0 || out < 0 || err < 0) ::_exit(127);
  ::dup2(in, 0);
  ::dup2(out, 1);
  ::dup2(err, 2);

  ::execve(argv[0], argv, envp);
  ::_exit(127);
}

}  // namespace

std::string SubprocessResult::describe() const {
  std::string s;
  if (timed_out) {
    s = "timed out after " + std::to_string(wall.count()) + " ms";
  } else if (term_signal) {
    s = "killed by signal " + std::to_string(term_signal);
  } else {
    s = "exit code " + std::to_string(exit_code);
  }
  if (!stderr_text.empty()) {
    std::string tail = stderr_text.size() > 2000 ? stderr_text.substr(stderr_text.size() - 2000) : stderr_text;
    s += ": " + tail;
  }
  return s;
}

SubprocessResult run_subprocess(const SubprocessSpec& spec) {
  std::vector<std::string> args = spec.argv;
  if (args.empty()) args = {"/bin/sh", "-c", spec.shell_command};
  if (args[0].find('/') == std::string::npos) {
    // Resolve through PATH before fork; execve does not search.
    const char* path = std::getenv("PATH");
    std::string p = path ? path : "/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= p.size()) {
      std::size_t end = p.find(':', start);
      if (end == std::string::npos) end = p.size();
      fs::path candidate = fs::path(p.substr(start, end - start)) / args[0];
      if (::access(candidate.c_str(), X_OK) == 0) {
        args[0] = candidate.string();
        break;
      }
      start = end + 1;
    }
  }

  std::map<std::string, std::string> env_map;
  if (spec.inherit_env) {
    for (char** e = environ; e && *e; ++e) {
      std::string kv = *e;
      auto eq = kv.find('=');
      if (eq != std::string::npos) env_map[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  } else {
    const char* path = std::getenv("PATH");
    env_map["PATH"] = path ? path : "/usr/local/bin:/usr/bin:/bin";
    env_map["LANG"] = "C.UTF-8";
    if (!spec.working_dir.empty()) {
      env_map["HOME"] = spec.working_dir.string();
      env_map["TMPDIR"] = spec.working_dir.string();
    }
  }
  for (const auto& [k, v] : spec.env) env_map[k] = v;

  std::vector<std::string> env_strings;
  for (const auto& [k, v] : env_map) env_strings.push_back(k + "=" + v);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);

  const std::string in_path = make_temp_file("stdin");
  const std::string out_path = make_temp_file("stdout");
  const std::string err_path = make_temp_file("stderr");
  codec::write_file(in_path, spec.stdin_data);

  const std::string uid_map = "0 " + std::to_string(::geteuid()) + " 1\n";
  const std::string gid_map = "0 " + std::to_string(::getegid()) + " 1\n";

  int status_pipe[2];
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) throw IoError("pipe failed");

  const auto started = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(status_pipe[0]);
    ::close(status_pipe[1]);
    throw BackendError("fork failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::close(status_pipe[0]);
    child_exec(spec, argv.data(), envp.data(), in_path.c_str(), out_path.c_str(), err_path.c_str(),
               uid_map, gid_map, status_pipe[1]);
  }
  ::close(status_pipe[1]);

  SubprocessResult result;
  const auto deadline = started + spec.limits.timeout;
  int status = 0;
  for (;;) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  // Reap anything left in the process group.
  ::kill(-pid, SIGKILL);

  char isolated = 0;
  if (::read(status_pipe[0], &isolated, 1) == 1) result.network_isolated = isolated != 0;
  ::close(status_pipe[0]);

  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.term_signal = WTERMSIG(status);
    }
  }
  result.stdout_text = codec::read_text_file(out_path);
  result.stderr_text = codec::read_text_file(err_path);
  std::error_code ec;
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);
  fs::remove(err_path, ec);
  return result;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string expand_command_template(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += shell_quote(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

TempDir::TempDir(const std::string& prefix) {
  std::string tmpl = (fs::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (!::mkdtemp(tmpl.data())) throw IoError("mkdtemp failed: " + std::string(std::strerror(errno)));
  path_ = tmpl;
}

TempDir::~TempDir() {
  if (!keep_ && !path_.empty()) {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
}

TempDir::TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)), keep_(other.keep_) {
  other.path_.clear();
}

TempDir& TempDir::operator=(TempDir&& other) noexcept {
  if (this != &other) {
    if (!keep_ && !path_.empty()) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
    path_ = std::move(other.path_);
    keep_ = other.keep_;
    other.path_.clear();
  }
  return *this;
}

}  // namespace cage
