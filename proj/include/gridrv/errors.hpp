#pragma once

#include <stdexcept>
#include <string>

namespace gridrv {

/// Argument outside the mathematical domain of an operation (negative time,
/// non-finite position, empty sample).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Invalid or inconsistent configuration, detected before any simulation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The requested simulation scheme cannot handle the model (e.g. drift under
/// the exact scheme).
class UnsupportedScheme : public std::invalid_argument {
public:
    explicit UnsupportedScheme(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace gridrv
