#pragma once

#include <stdexcept>
#include <string>

namespace ktri {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed scenario text; message carries a field path or line context.
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};

/// Input violates general position and the active policy forbids repair.
struct DegeneracyError : Error {
    explicit DegeneracyError(const std::string& what) : Error("degenerate input: " + what) {}
};

/// A certificate polynomial vanishes identically (motion keeps a predicate
/// at zero over a whole interval), so no discrete failure time exists.
struct DegenerateMotionError : Error {
    explicit DegenerateMotionError(const std::string& what)
        : Error("degenerate motion: " + what) {}
};

/// Query time outside a trajectory's definition or the simulation window.
struct WindowError : Error {
    explicit WindowError(const std::string& what) : Error("out of window: " + what) {}
};

/// Internal consistency check failed (queue inconsistency, broken invariant).
struct InternalError : Error {
    explicit InternalError(const std::string& what) : Error("internal error: " + what) {}
};

}  // namespace ktri
