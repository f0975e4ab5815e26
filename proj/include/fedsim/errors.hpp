#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Structural mismatch between parameter vectors / layouts.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user-facing configuration; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Violation of the client/server exchange contract (e.g. an update claiming
// a base version the server has not reached).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// A run that can make no progress (no client ever delivered an update).
class StalledRunError : public std::runtime_error {
public:
    explicit StalledRunError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedsim
