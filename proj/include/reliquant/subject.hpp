#pragma once

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <spawn.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/monitor.hpp"
#include "reliquant/text.hpp"

extern char** environ;

namespace reliquant {

using Output = std::vector<std::string>;

/// Subject's answer to one case. `error` marks a subject-side failure for
/// that case only (a `!` reply on the line protocol).
struct Reply {
  bool error = false;
  std::string message;
  Output outputs;
};

/// Software under test. Must behave as a pure function of the input point.
/// One instance is created per worker and never shared between threads.
class Subject {
 public:
  virtual ~Subject() = default;
  virtual Reply run(const InputPoint& input) = 0;
};

/// Named way of instantiating a subject, once per worker.
struct SubjectSource {
  std::string id;
  std::function<std::unique_ptr<Subject>()> make;
};

namespace detail {

template <typename F>
class FunctionSubject final : public Subject {
 public:
  explicit FunctionSubject(F f) : f_(std::move(f)) {}
  Reply run(const InputPoint& input) override { return f_(input); }

 private:
  F f_;
};

}  // namespace detail

/// Adapts a callable `Reply(const InputPoint&)` into a subject source.
template <typename F>
SubjectSource in_process_subject(std::string id, F f) {
  return {std::move(id), [f = std::move(f)]() -> std::unique_ptr<Subject> {
            return std::make_unique<detail::FunctionSubject<F>>(f);
          }};
}

/// Subject running as a child process speaking the line protocol: one
/// tab-separated input line per case in, one tab-separated output line
/// back; a reply starting with `!` reports a subject-side error.
class SubprocessSubject final : public Subject {
 public:
  SubprocessSubject(std::string command, const InputDomain& domain) : domain_(&domain), command_(std::move(command)) {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SubjectError("pipe: " + std::string(std::strerror(errno)));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw SubjectError("pipe: " + std::string(std::strerror(errno)));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    std::string shell = "/bin/sh";
    std::string flag = "-c";
    char* argv[] = {shell.data(), flag.data(), command_.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    if (rc != 0) {
      close_pipes();
      pid_ = -1;
      throw SubjectError("failed to launch subject '" + command_ + "': " + std::strerror(rc));
    }
  }

  SubprocessSubject(const SubprocessSubject&) = delete;
  SubprocessSubject& operator=(const SubprocessSubject&) = delete;

  ~SubprocessSubject() override {
    close_pipes();
    if (pid_ > 0) reap(std::chrono::seconds(2));
  }

  Reply run(const InputPoint& input) override {
    std::string line = domain_->render(input.values, '\t');
    line += '\n';
    write_all(line);
    const std::string reply = read_line();
    if (!reply.empty() && reply.front() == '!') return {true, reply.substr(1), {}};
    Reply r;
    r.outputs = text::split(reply, '\t');
    return r;
  }

 private:
  void write_all(std::string_view data) {
    while (!data.empty()) {
      const ssize_t n = ::write(to_child_, data.data(), data.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SubjectError("subject '" + command_ + "' stopped accepting input: " + exit_description());
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  std::string read_line() {
    while (true) {
      const auto eol = buffer_.find('\n');
      if (eol != std::string::npos) {
        std::string line = buffer_.substr(0, eol);
        buffer_.erase(0, eol + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        throw SubjectError("subject '" + command_ + "' closed its output without replying: " + exit_description());
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string exit_description() {
    close_pipes();
    const int status = reap(std::chrono::milliseconds(500));
    if (status < 0) return "still running";
    if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
    return "terminated";
  }

  void close_pipes() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
  }

  // Waits for the child, killing it after `grace`. Returns the wait status,
  // or -1 when it was still running and had to be killed.
  int reap(std::chrono::milliseconds grace) {
    if (pid_ <= 0) return reaped_status_;
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int status = 0;
    while (true) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || (r < 0 && errno != EINTR)) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        status = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    pid_ = -1;
    reaped_status_ = status;
    return status;
  }

  const InputDomain* domain_;
  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int reaped_status_ = -1;
  std::string buffer_;
};

/// Resolves a subject spec:
///
///   builtin:monitor          reference make-safe monitor
///   builtin:monitor_mutant   monitor with an off-by-one temperature threshold
///   builtin:null             no outputs; for harness throughput measurement
///   exec:<command line>      child process speaking the line protocol
///
/// The domain must outlive the returned source.
inline SubjectSource make_subject_source(std::string_view spec, const InputDomain& domain) {
  const std::string id(spec);
  if (spec == "builtin:monitor" || spec == "builtin:monitor_mutant") {
    monitor::check_domain_shape(domain);
    const bool mutated = spec == "builtin:monitor_mutant";
    return in_process_subject(id, [mutated](const InputPoint& p) {
      return Reply{false, {}, monitor::run(monitor::read(p.values), mutated)};
    });
  }
  if (spec == "builtin:null") {
    return in_process_subject(id, [](const InputPoint&) { return Reply{}; });
  }
  if (spec.rfind("exec:", 0) == 0) {
    std::string command(spec.substr(5));
    if (text::trim(command).empty()) throw ValidationError("exec subject needs a command line");
    const InputDomain* d = &domain;
    return {id, [command, d]() -> std::unique_ptr<Subject> { return std::make_unique<SubprocessSubject>(command, *d); }};
  }
  throw ValidationError("unknown subject '" + id + "' (expected builtin:<name> or exec:<command>)");
}

}  // namespace reliquant
