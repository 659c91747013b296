#pragma once

#include <stdexcept>
#include <string>

namespace lwgnn {

// Matrix or tensor dimensions do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Caller supplied arguments that violate an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input data could not be parsed or is internally inconsistent.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class ConsistencyError : public DataError {
public:
    using DataError::DataError;
};

// A loss or activation became NaN/Inf.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lwgnn
