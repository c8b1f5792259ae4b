#pragma once

#include <stdexcept>
#include <string>

namespace glac {

// Shape/dimension violations in tensor operations.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// API misuse: a precondition the caller controls was violated.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// A numeric parameter is outside its documented range.
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Token id or position outside the valid range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Well-formed input that violates a data invariant (alignment, dimensions).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input that cannot be parsed at all.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace glac
