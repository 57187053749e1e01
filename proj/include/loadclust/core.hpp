#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace loadclust {

inline constexpr std::size_t kHoursPerDay = 24;

/// One day of hourly readings, hour 0 first.
using CurveValues = std::array<double, kHoursPerDay>;

/// Base class for runtime failures that are not caller precondition violations
/// (those raise std::invalid_argument).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised when a clustering collapses so that cluster-quality ratios are undefined.
class DegenerateClustering : public Error {
public:
    using Error::Error;
};

}  // namespace loadclust
