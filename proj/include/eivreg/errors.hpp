#pragma once

#include <stdexcept>
#include <string>

namespace eivreg {

/// Bad input: shapes, ranges, malformed files or configs. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A decomposition or solve that did not produce a usable result. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace eivreg
