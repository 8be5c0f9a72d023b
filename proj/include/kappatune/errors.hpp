#pragma once

#include <stdexcept>
#include <string>

namespace kappatune {

// Failure taxonomy shared across the toolkit. The CLI maps these to exit
// codes in one place; divergence during training is never an exception, it
// is reported as an infinite loss.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad options, unknown config keys, invalid grids or shapes of requests.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Dataset problems: missing files, empty sets, label out of range.
class DataError : public Error {
public:
  using Error::Error;
};

// Binary container violations; messages name the byte offset.
class FormatError : public Error {
public:
  using Error::Error;
};

// Tensor dimension mismatches.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Arguments outside a value's defined span, e.g. an example index past the
// end of a schedule.
class DomainError : public Error {
public:
  using Error::Error;
};

// A whole workflow failed because training blew up everywhere, e.g. a sweep
// where no rate converged. Distinct from per-run divergence, which is an
// infinite loss, not an exception.
class DivergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace kappatune
