// SPDX-License-Identifier: Apache-2.0
#include "logo/error.hpp"

namespace logo {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::schema: return "schema";
        case ErrorKind::io: return "io";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace logo
