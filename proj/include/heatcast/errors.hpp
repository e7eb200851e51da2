#pragma once

#include <stdexcept>
#include <string>

namespace heatcast {

/// Bad run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unusable or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model training or model I/O failure (CLI exit code 4).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace heatcast
