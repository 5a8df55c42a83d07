#pragma once

#include <stdexcept>
#include <string>

namespace egtw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid domain values: broken invariants, bad shapes, out-of-range arguments.
struct ValidationError : Error {
    using Error::Error;
};

// 6D rotation blocks that cannot be orthogonalized (zero or parallel columns).
struct DegenerateRotationError : ValidationError {
    using ValidationError::ValidationError;
};

// Corrupt or truncated serialized data.
struct FormatError : Error {
    using Error::Error;
};

// Inconsistent experiment / model configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite loss during training; message carries diagnostics.
struct TrainingDiverged : Error {
    using Error::Error;
};

} // namespace egtw
