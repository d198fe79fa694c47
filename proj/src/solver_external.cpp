#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>

#include "dimp/error.hpp"
#include "dimp/solver.hpp"

namespace dimp {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

OracleResult ExternalOracle::check(const Obligation& ob) { return run_script(emit_smtlib(ob)); }

OracleResult ExternalOracle::run_script(const std::string& script) const {
  OracleResult out;
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) {
    out.detail = std::string("pipe: ") + std::strerror(errno);
    return out;
  }
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    out.detail = std::string("pipe: ") + std::strerror(errno);
    return out;
  }
  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    out.detail = std::string("fork: ") + std::strerror(errno);
    return out;
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl(path_.c_str(), path_.c_str(), "-smt2", "-in", static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  signal(SIGPIPE, SIG_IGN);
  std::size_t written = 0;
  while (written < script.size()) {
    ssize_t n = write(in_pipe[1], script.data() + written, script.size() - written);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  close(in_pipe[1]);

  std::string reply;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
  bool timed_out = false;
  char buf[4096];
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{out_pipe[0], POLLIN, 0};
    int r = poll(&pfd, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (r == 0) {
      timed_out = true;
      break;
    }
    ssize_t n = read(out_pipe[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    reply.append(buf, static_cast<std::size_t>(n));
  }
  close(out_pipe[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) {
    out.detail = "solver timeout after " + std::to_string(timeout_ms_) + " ms";
    return out;
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127 && reply.empty()) {
    out.detail = "cannot execute " + path_;
    return out;
  }
  std::string first = trim(reply.substr(0, reply.find('\n')));
  if (first == "unsat") {
    out.verdict = Verdict::Valid;
  } else if (first == "sat") {
    out.verdict = Verdict::Invalid;
  } else {
    out.detail = "solver answered: " + trim(reply);
  }
  return out;
}

OracleResult RecordingOracle::check(const Obligation& ob) {
  OracleResult r = inner_->check(ob);
  std::string script = emit_smtlib(ob);
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back({std::move(script), r.verdict});
  return r;
}

std::vector<RecordingOracle::Entry> RecordingOracle::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

SolverConfig parse_solver_spec(const std::string& spec, int timeout_ms) {
  SolverConfig c;
  c.timeout_ms = timeout_ms;
  if (spec == "internal") return c;
  const std::string prefix = "external:";
  if (spec.rfind(prefix, 0) != 0 && spec != "external") {
    fail(ErrorKind::Structural, "unknown solver '" + spec + "' (expected internal or external:<path>)");
  }
  c.external = true;
  c.path = spec.size() > prefix.size() ? spec.substr(prefix.size()) : "z3";
  if (const char* env = std::getenv("DIMP_SOLVER"); env && *env) c.path = env;
  return c;
}

std::shared_ptr<Oracle> make_oracle(const SolverConfig& config) {
  if (config.external) return std::make_shared<ExternalOracle>(config.path, config.timeout_ms);
  return std::make_shared<InternalOracle>();
}

}  // namespace dimp
