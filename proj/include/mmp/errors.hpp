#pragma once

#include <stdexcept>
#include <string>

namespace mmp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad scenario, bad formula text, bad argument values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class OutOfWorkspaceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// A finite word is too short to decide a bounded operator.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

class TerminalDesignError : public Error {
 public:
  using Error::Error;
};

class UnsatisfiableError : public Error {
 public:
  UnsatisfiableError(int agent, const std::string& what) : Error(what), agent_(agent) {}
  int agent() const { return agent_; }

 private:
  int agent_;
};

/// Closed-loop re-solve failed during simulation.
class InfeasibleError : public Error {
 public:
  InfeasibleError(int agent, int interval, int sample, const std::string& what)
      : Error(what), agent_(agent), interval_(interval), sample_(sample) {}
  int agent() const { return agent_; }
  int interval() const { return interval_; }
  int sample() const { return sample_; }

 private:
  int agent_, interval_, sample_;
};

}  // namespace mmp
