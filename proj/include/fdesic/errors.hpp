// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fdesic {

/// A model evaluation hit a singular or non-finite intermediate value.
class NumericDegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The frequency grid does not contain both -3 dB crossings of a peak.
class BandTooNarrowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fdesic
