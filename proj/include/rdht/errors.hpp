#pragma once

#include <stdexcept>
#include <string>

namespace rdht {

// Failure categories; numeric values double as CLI exit codes.
enum class ErrorKind {
    usage = 2,
    capacity = 3,
    inconsistency = 4,
    io = 5,
};

class RdhError : public std::runtime_error {
public:
    RdhError(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw RdhError(kind, message);
}

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

} // namespace rdht
