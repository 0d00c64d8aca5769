#pragma once

#include <stdexcept>
#include <string>

namespace msgp {

// Error category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  config,     // invalid settings, exit code 2
  data,       // malformed or inconsistent input data, exit code 3
  numerical,  // factorization failure, non-finite likelihood, exit code 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::numerical:
      return 4;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// Warnings go through a replaceable sink so tests and the Python module can
// silence or capture them.
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace msgp
