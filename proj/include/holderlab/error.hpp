#pragma once

#include <stdexcept>
#include <string>

namespace holderlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (shape, rank, range).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A scale parameter is finer than the grid can represent.
class UnderResolvedError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A computation produced an unusable result (blow-up, degenerate fit).
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace detail
}  // namespace holderlab
