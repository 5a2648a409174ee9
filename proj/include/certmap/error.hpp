#pragma once

#include <stdexcept>
#include <string>

namespace certmap {

enum class Errc {
  invalid_input,
  invalid_rotation,
  out_of_range,
  degenerate_graph,
  ambiguous_rotation,
  unobservable_rotation,
  no_consensus,
  insufficient_features,
  scenario_error,
  io_error,
};

const char* to_string(Errc c);

/// Single exception type carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::invalid_input: return "invalid_input";
    case Errc::invalid_rotation: return "invalid_rotation";
    case Errc::out_of_range: return "out_of_range";
    case Errc::degenerate_graph: return "degenerate_graph";
    case Errc::ambiguous_rotation: return "ambiguous_rotation";
    case Errc::unobservable_rotation: return "unobservable_rotation";
    case Errc::no_consensus: return "no_consensus";
    case Errc::insufficient_features: return "insufficient_features";
    case Errc::scenario_error: return "scenario_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace certmap
