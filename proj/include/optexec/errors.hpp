#pragma once

#include <stdexcept>
#include <string>

namespace optexec {

/// Invalid parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stored artifact was produced for different parameters than requested.
class ParamsMismatchError : public ConfigError {
public:
    ParamsMismatchError(std::string key, const std::string& message)
        : ConfigError(message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Numerical failure (non-convergence, broken contraction). Exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system or payload failure. Exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace optexec
