#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reflexq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, malformed files, unusable records. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Uncontrolled peaks contain a zero, so the reward normalization is undefined.
class DegeneratePeaksError : public InputError {
 public:
  using InputError::InputError;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::size_t step, const std::string& what)
      : Error("simulation diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ProbeFailed : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace reflexq

namespace reflexq {

/// A response never fell below the truncation threshold after its peak.
class CutoffNotReached : public ProbeFailed {
 public:
  using ProbeFailed::ProbeFailed;
};

}  // namespace reflexq
