#pragma once

#include <stdexcept>
#include <string>

namespace purify {

// Invalid argument values (ranges, sizes, enum strings).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Step/position indices outside their valid range.
class IndexError : public std::out_of_range {
public:
    explicit IndexError(const std::string& msg) : std::out_of_range(msg) {}
};

// Tensor shape mismatches; message carries both shapes.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Bad dataset contents (labels out of range, empty data).
class DataError : public std::invalid_argument {
public:
    explicit DataError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite values produced at runtime; message names the step where it happened.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training could not proceed (empty dataset, diverged loss).
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (e.g. backward with a tape from a stale forward pass).
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// Internally inconsistent schedule (e.g. sigma^2 exceeding 1 - alpha_bar).
class ScheduleError : public std::runtime_error {
public:
    explicit ScheduleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace purify
