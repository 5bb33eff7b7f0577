#pragma once

#include <stdexcept>
#include <string>

namespace graspkit {

// Caller passed arguments or configuration that violate a documented
// precondition. Maps to exit code 2 in the CLI.
class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Tensor or vector dimensions do not match the configured layout.
class ShapeError : public UsageError {
public:
    explicit ShapeError(const std::string& msg) : UsageError(msg) {}
};

// A file on disk does not conform to its declared format.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid depth, out-of-bounds pixel, degenerate rotation and friends.
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// A manifest or dataset record violates its schema.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Generic I/O failure (missing file, unwritable path).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace graspkit
