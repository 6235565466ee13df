#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxvolcf {

/// Malformed input data; carries the 1-based line number of the offender.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Elimination found no usable pivot; `step` is the 0-based step that failed.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Iteration cap hit. The seed indices at the cap are still a valid
/// (possibly non-dominant) seed and are carried along for the caller.
class IterationCapError : public std::runtime_error {
 public:
  IterationCapError(std::vector<std::ptrdiff_t> seed, const std::string& what)
      : std::runtime_error(what), seed_(std::move(seed)) {}
  const std::vector<std::ptrdiff_t>& seed() const { return seed_; }

 private:
  std::vector<std::ptrdiff_t> seed_;
};

class IllConditioningError : public std::runtime_error {
 public:
  IllConditioningError(double condition, const std::string& what)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double residual, const std::string& what)
      : std::runtime_error(what), residual_(residual) {}
  double achieved_residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace maxvolcf
