#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dibmix {

/// Broad failure category; the CLI maps it onto an exit code.
enum class ErrorKind {
    input,     // bad user input: files, flags, schema, values
    numerical, // degenerate configuration detected during computation
    internal,
};

/// Library-wide exception carrying a stable machine-readable code
/// (e.g. "input_not_found", "zero_variance", "degenerate_smoothing").
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message, ErrorKind kind = ErrorKind::input)
        : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    std::string code_;
    ErrorKind   kind_;
};

inline void require(bool condition, const char* code, const std::string& message,
                    ErrorKind kind = ErrorKind::input) {
    if (!condition) {
        throw Error(code, message, kind);
    }
}

} // namespace dibmix
