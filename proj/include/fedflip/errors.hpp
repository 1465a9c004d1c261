#pragma once

#include <stdexcept>

namespace fedflip {

// Invalid or contradictory experiment configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable or malformed dataset input (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or out-of-range indices in the numeric core
// (CLI exit code 3).
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fedflip
