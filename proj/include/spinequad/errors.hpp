#pragma once

#include <stdexcept>
#include <string>

namespace spinequad {

// Bad value passed by a caller (preconditions, shape mismatches).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Input file could not be parsed as the documented format.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Parsed data violates a documented invariant; message names the field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A measurement/analysis routine cannot produce a result from the given data
// (too few events, incomplete lap, ...).
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

// The simulator produced a non-finite state. `last_valid_time` is the sim time
// of the last finite state; callers that keep trajectories also have the state.
class SimulationDivergedError : public std::runtime_error {
 public:
  SimulationDivergedError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_ = 0.0;
};

// Training loss became non-finite.
class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_ = 0;
};

}  // namespace spinequad
