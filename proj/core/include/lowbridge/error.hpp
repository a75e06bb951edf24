#pragma once

#include <stdexcept>
#include <string>

namespace lowbridge {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, malformed configs, contract violations detected up front.
// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Tensor dimension mismatches. Messages name the offending dimension.
class ShapeError : public ValidationError {
public:
    explicit ShapeError(const std::string& msg) : ValidationError(msg) {}
};

// File system and format failures while reading or writing artifacts.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Checkpoint parsing failures, one kind per distinguishable defect.
class CheckpointError : public IoError {
public:
    enum class Kind { bad_magic, unsupported_version, truncated, malformed };

    CheckpointError(Kind kind, const std::string& msg) : IoError(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Training loop hit a non-finite loss and aborted.
class TrainingDiverged : public Error {
public:
    explicit TrainingDiverged(const std::string& msg) : Error(msg) {}
};

} // namespace lowbridge
