#include "groundbridge/error.hpp"

namespace groundbridge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "configuration";
    case ErrorKind::shape: return "shape";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::shortage: return "shortage";
    case ErrorKind::contract: return "contract";
    case ErrorKind::argument: return "argument";
    case ErrorKind::format: return "format";
    case ErrorKind::mapping: return "mapping";
    case ErrorKind::solver: return "solver";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::io: return "I/O";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::io ? 3 : 2; }

}  // namespace groundbridge
