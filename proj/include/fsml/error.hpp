#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace fsml {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Local fit with no effective support (every kernel weight vanished).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Query curve lies outside the support of the training curves.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

/// An object is used in a state that cannot serve the request.
class StateError : public Error {
 public:
  using Error::Error;
};

class FoldConstructionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IncompatibleVersionError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure raised inside one pipeline stage. The original exception
/// is kept so callers can still dispatch on its type.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, std::exception_ptr cause = nullptr)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)), cause_(std::move(cause)) {}

  const std::string& stage() const noexcept { return stage_; }
  std::exception_ptr cause() const noexcept { return cause_; }
  [[noreturn]] void rethrow_cause() const {
    if (cause_) std::rethrow_exception(cause_);
    throw Error(what());
  }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

/// Runs `body`, rethrowing any library error as a StageError naming `stage`.
template <typename F>
decltype(auto) run_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what(), std::current_exception());
  }
}

}  // namespace fsml
