#pragma once

#include <stdexcept>
#include <string>

namespace beliefsim {

/// Invalid user input or a violated precondition. The CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric failure while computing (zero normalizer, singular system, ...).
/// The CLI maps this to exit code 2.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its budget without reaching tolerance.
/// Distinct from invalid input.
struct convergence_error : numeric_error {
    using numeric_error::numeric_error;
};

} // namespace beliefsim
