// Error reporting shared by every downwash module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace downwash {

/// Failure categories. The CLI maps them onto stable exit codes.
enum class ErrorKind {
    argument,     // malformed call arguments (empty grid, bad bin count)
    domain,       // non-physical inputs (negative thrust, zero viscosity)
    validity,     // formula evaluated outside its region of validity
    range,        // query outside the covered data range
    shape,        // inconsistent array shapes or axes
    stitch,       // insufficient overlap between field sections
    fit,          // rank-deficient or otherwise failed regression
    not_merged,   // merge criterion never satisfied
    state,        // object not in a usable state (e.g. empty grid)
    degenerate,   // contour/envelope could not be formed
    binning,      // phase bin without samples
    aliasing,     // sample rate too low for the requested motion
    config,       // run configuration rejected
    data,         // input file malformed
    conversion,   // dataset mapping incomplete
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by merge-point detection; carries the smallest relative gap seen.
class NotMergedError : public Error {
public:
    NotMergedError(const std::string& message, double min_gap)
        : Error(ErrorKind::not_merged, message), min_gap_(min_gap) {}

    double min_gap() const noexcept { return min_gap_; }

private:
    double min_gap_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const char* message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace downwash
