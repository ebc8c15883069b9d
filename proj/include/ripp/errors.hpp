#pragma once

#include <stdexcept>
#include <string>

namespace ripp {

// Bad data: malformed files, invariant violations, degenerate observed subgroups.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (flags, scenario tokens, estimand indices).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A resource cap was exceeded (e.g. the assignment-enumeration limit).
struct limit_error : std::runtime_error {
    explicit limit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ripp
