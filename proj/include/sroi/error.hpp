#pragma once

#include <stdexcept>
#include <string>

namespace sroi {

/// Broad failure classes. The CLI maps these onto exit codes 1, 2 and 3.
enum class ErrorKind {
  kParse,       // malformed input bytes, I/O
  kValidation,  // input violates a precondition (empty region, k too large)
  kAlgorithm,   // the pipeline could not produce a valid result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace sroi
