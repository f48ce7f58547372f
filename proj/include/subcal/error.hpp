#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace subcal {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data or a record violating the schema.
class DataError : public Error {
public:
    using Error::Error;
};

// I/O failure: missing file, unwritable path.
class IoError : public Error {
public:
    using Error::Error;
};

// A competing-event subject needs weights past its observed time but the
// censoring survival estimate is zero there.
class DegenerateWeightError : public Error {
public:
    DegenerateWeightError(std::size_t subject, int observed_time);
    std::size_t subject;
    int observed_time;
};

// A discrete time index has no rows in the long-format design.
class DesignDeficiencyError : public Error {
public:
    explicit DesignDeficiencyError(int time);
    int time;
};

// Maximum likelihood estimate does not exist (fitted probabilities driven to 0 or 1).
class SeparationError : public Error {
public:
    using Error::Error;
};

// Newton iterations exhausted; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate, int iterations);
    std::vector<double> last_iterate;
    int iterations;
};

// Calibration grouping could not be formed.
class GroupingError : public Error {
public:
    using Error::Error;
};

// A predicted hazard is exactly 0 or 1, so its logit is undefined.
class InvalidLogitError : public Error {
public:
    InvalidLogitError(std::size_t subject, int time, double hazard);
    std::size_t subject;
    int time;
};

}  // namespace subcal
