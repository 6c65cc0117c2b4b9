#pragma once

#include <stdexcept>
#include <string>

namespace qtrade {

// Error taxonomy mirrored by the CLI exit codes: config errors exit 2,
// data errors exit 3, anything else exits 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke an API contract (step after done, dimension mismatch, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace qtrade
