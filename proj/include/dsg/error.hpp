#pragma once

#include <stdexcept>
#include <string>

namespace dsg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user-supplied configuration (flags, group tags, option values).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Bad or inconsistent data (files, shapes, invariant violations, math preconditions).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

} // namespace dsg
