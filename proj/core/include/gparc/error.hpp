#pragma once

#include <stdexcept>
#include <string>

namespace gparc {

/// Raised when an input violates a documented precondition.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, singular matrix,
/// overflow).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gparc
