#pragma once

#include <stdexcept>
#include <string>

namespace homog {

// Base type for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (bad sizes, unknown label, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// A metric or statistic has no defined value on the given data
// (constant column, empty group, log of zero).
struct UndefinedMetric : Error {
    using Error::Error;
};

// Malformed input file; message carries a line number where possible.
struct ParseError : Error {
    using Error::Error;
};

// Training set contains a single class; callers may substitute a
// constant classifier.
struct DegenerateTrainingSet : Error {
    using Error::Error;
};

}  // namespace homog
