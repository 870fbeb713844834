#pragma once

#include <stdexcept>
#include <string>

namespace twoport {

/// Bad arguments or malformed input data.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical operation failed (singular solve, divergence, non-finite value).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Singular 2x2 solve at a specific frequency index.
struct SingularSolve : NumericalError {
    std::size_t frequency_index;
    explicit SingularSolve(std::size_t idx)
        : NumericalError("singular solve at frequency index " + std::to_string(idx)),
          frequency_index(idx) {}
};

/// Requested work exceeds a caller-provided cap (enumeration, dedup retries).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Corrupt or truncated serialized data.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace twoport
