#pragma once

#include <stdexcept>
#include <string>

namespace bss {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  no_convergence,
  stage_failure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace bss
