#pragma once

#include <stdexcept>
#include <string>

namespace hiflow {

// Invalid user input: bad shape parameters, malformed config files, violated
// call preconditions. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime numerical failure. CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Curvature exceeded the guard ceiling; run_flow turns this into a
// blowup_guard termination instead of propagating.
struct BlowupError : NumericalError {
    using NumericalError::NumericalError;
};

// Armijo backtracking ran out of halvings. Kept distinct because it firing
// on a sane configuration means the gradient is wrong.
struct LinesearchError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace hiflow
