#ifndef FPANEL_ERRORS_HPP
#define FPANEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fpanel {

// Base class for everything this library throws on purpose. Plain parameter
// mistakes (alpha outside (0,1), lag out of range) use std::invalid_argument
// instead, since those are caller bugs rather than data problems.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or layout violations: mismatched grids, ragged replicate counts,
// non-monotone grids, malformed input files.
class StructuralError : public Error {
public:
  using Error::Error;
};

// The data are well formed but too small for the requested operation,
// e.g. asking for lag h with fewer than h + 2 replicates.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Numerically meaningless input: an all-zero covariance spectrum, a
// singular pooled covariance with no usable directions, and similar.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

} // namespace fpanel

#endif
