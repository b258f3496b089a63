#pragma once

#include <stdexcept>
#include <string>

namespace wearsyn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / archive problems.
struct IoError : Error { using Error::Error; };
// Malformed archive contents.
struct ParseError : Error { using Error::Error; };
// Archive parsed but violates the expected layout (missing channel, bad rate).
struct SchemaError : Error { using Error::Error; };
// Bad operation arguments or configuration.
struct ConfigError : Error { using Error::Error; };
// Training diverged or could not proceed.
struct TrainingError : Error { using Error::Error; };
// DP calibration / certificate problems.
struct PrivacyError : Error { using Error::Error; };

}  // namespace wearsyn
