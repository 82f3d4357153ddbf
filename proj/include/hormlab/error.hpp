#pragma once

#include <stdexcept>
#include <string>

namespace hormlab {

enum class ErrorKind {
  structural,
  parameter,
  resolution,
  budget,
  coverage,
  support_declaration,
  tail_bound,
  arity,
  fit,
  schema,
  io
};

inline const char *to_string(ErrorKind k) {
  switch (k) {
  case ErrorKind::structural: return "structural";
  case ErrorKind::parameter: return "parameter";
  case ErrorKind::resolution: return "resolution";
  case ErrorKind::budget: return "budget";
  case ErrorKind::coverage: return "coverage";
  case ErrorKind::support_declaration: return "support_declaration";
  case ErrorKind::tail_bound: return "tail_bound";
  case ErrorKind::arity: return "arity";
  case ErrorKind::fit: return "fit";
  case ErrorKind::schema: return "schema";
  case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string &msg) {
  if (!cond)
    throw Error(kind, msg);
}

} // namespace hormlab
