#pragma once

#include <stdexcept>
#include <string>

namespace isoguard {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// usage -> 1, data -> 2, model -> 3, io -> 2 (data-adjacent) except on model files.
enum class ErrorKind {
    Usage,
    Data,
    Model,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_model(const std::string& msg) { throw Error(ErrorKind::Model, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::Io, msg); }

}  // namespace isoguard
