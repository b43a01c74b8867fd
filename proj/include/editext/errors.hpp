#pragma once

#include <stdexcept>
#include <string>

namespace editext {

// Error taxonomy. Every throwing operation in the library uses one of these,
// so callers (CLI, tests) can map failure classes to exit codes uniformly.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation requires state that has not been established (untrained model,
// missing normalization statistics, absent checkpoint).
struct state_error : std::runtime_error {
    explicit state_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct training_error : std::runtime_error {
    explicit training_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint container problems: bad magic or unsupported version.
struct format_error : std::runtime_error {
    explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint payload problems: truncation, shape disagreement with metadata.
struct corruption_error : std::runtime_error {
    explicit corruption_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace editext
