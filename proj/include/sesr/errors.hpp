#pragma once

#include <stdexcept>
#include <string>

namespace sesr {

// Shape/axis mismatches between tensors and layer specs.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user-supplied configuration (quality out of range, bad preset, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Network structure violates an operation's preconditions.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// Forward/backward state mismatch (backward without matching forward cache).
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, long long offset = -1)
        : std::runtime_error(offset >= 0 ? msg + " (at byte " + std::to_string(offset) + ")" : msg),
          byte_offset(offset) {}
    long long byte_offset;
};

// Filesystem-level failures (missing file, unreadable directory).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loss became non-finite; names the epoch where it happened.
class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(const std::string& msg, int epoch_index)
        : std::runtime_error(msg + " (epoch " + std::to_string(epoch_index) + ")"),
          epoch(epoch_index) {}
    int epoch;
};

}  // namespace sesr
