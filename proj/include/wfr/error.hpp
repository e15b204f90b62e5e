#pragma once

#include <stdexcept>
#include <string>

namespace wfr {

// Precondition violated by the caller (bad parameter, bad range, ...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The computation itself failed: eigensolver non-convergence, norm drift,
// degenerate spectrum, insufficient data.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

} // namespace detail
} // namespace wfr
