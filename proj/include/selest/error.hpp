#pragma once

#include <stdexcept>
#include <string>

namespace selest {

// Solver-level failure (singular system, divergent scaling). The CLI maps
// this to its numerical-failure exit code, everything else to data errors.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace selest
