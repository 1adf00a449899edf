#pragma once

#include <stdexcept>
#include <string>

namespace gvpnn {

// Error categories, mirrored one-to-one by the C API status codes and the
// CLI exit codes.
enum class Errc {
  invalid_argument,
  parse,
  io,
  numeric,
  metric_undefined,
  property_violation,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// Contract violations (shape mismatches, bad preconditions on in-memory calls).
[[noreturn]] inline void fail_contract(const std::string& msg) {
  throw Error(Errc::invalid_argument, msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail_contract(msg);
}

}  // namespace gvpnn
