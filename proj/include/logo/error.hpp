// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logo {

// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
    invalid_argument,
    schema,
    io,
    not_found,
    numeric,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

inline void require(bool condition, ErrorKind kind, const char* message) {
    if (!condition) fail(kind, message);
}

}  // namespace logo
