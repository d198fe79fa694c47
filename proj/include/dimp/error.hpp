#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dimp {

enum class ErrorKind { Structural, Parse, Wf, Type, Solver, Unsupported };

const char* to_string(ErrorKind k);

// Every failure carries the judgement trace accumulated while unwinding:
// innermost rule first.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, int line = 0)
      : std::runtime_error(message), kind_(kind), message_(std::move(message)), line_(line) {}

  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  void set_line(int l) {
    if (line_ == 0) line_ = l;
  }
  const std::vector<std::string>& trace() const { return trace_; }
  void push_trace(std::string frame) { trace_.push_back(std::move(frame)); }
  // Extra detail lines (failing clause, countermodel, ...).
  const std::vector<std::string>& notes() const { return notes_; }
  void add_note(std::string n) { notes_.push_back(std::move(n)); }
  // Set when an oracle backend failed (as opposed to answering Invalid).
  bool solver_failure() const { return solver_failure_; }
  void set_solver_failure() { solver_failure_ = true; }

  std::string render() const;

 private:
  ErrorKind kind_;
  std::string message_;
  int line_;
  std::vector<std::string> trace_;
  std::vector<std::string> notes_;
  bool solver_failure_ = false;
};

[[noreturn]] void fail(ErrorKind kind, std::string message, int line = 0);

// Runs `body`, tagging any escaping Error with `frame`.
template <class F>
decltype(auto) in_rule(const char* frame, F&& body) {
  try {
    return body();
  } catch (Error& e) {
    e.push_trace(frame);
    throw;
  }
}

}  // namespace dimp
