#pragma once

#include <stdexcept>
#include <string>

namespace hjm {

/// Bad input: malformed files, invariant violations, out-of-range parameters.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The numerics could not produce an answer (infeasible system, failed sanity check).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hjm
