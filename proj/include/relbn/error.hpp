#pragma once

#include <stdexcept>
#include <string>

namespace relbn {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorKind {
    Validation = 1,         // bad input: manifest, data, config, unknown ids
    MissingDependency = 2,  // upstream stage artifact absent or stale
    Internal = 3,           // internal consistency failure (e.g. negative count)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

[[noreturn]] inline void fail_validation(const std::string& message) {
    throw Error(ErrorKind::Validation, message);
}

[[noreturn]] inline void fail_internal(const std::string& message) {
    throw Error(ErrorKind::Internal, message);
}

}  // namespace relbn
