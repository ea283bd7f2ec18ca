#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundbridge {

enum class ErrorKind {
  config,      // invalid configuration values
  shape,       // dimension / length mismatch
  numeric,     // non-finite values
  shortage,    // not enough samples or occurrences
  contract,    // violated precondition (e.g. non-unit embeddings)
  argument,    // out-of-range argument
  format,      // malformed input document
  mapping,     // corpus occurrence cannot be resolved
  solver,      // linear solver failure
  degenerate,  // zero-norm or rank-0 data
  duplicate,   // concept introduced twice
  io,          // filesystem failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

// Exit code convention used by the command-line tool: 2 for configuration and
// contract problems, 3 for I/O.
int exit_code_for(ErrorKind kind);

}  // namespace groundbridge
