#pragma once

#include <stdexcept>
#include <string>

namespace fingertrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

// Thrown by the pipeline; names the failing stage and timestep.
class StageError : public Error {
 public:
  StageError(std::string stage, int timestep, const std::string& cause)
      : Error("stage '" + stage + "' failed at timestep " + std::to_string(timestep) + ": " + cause),
        stage_(std::move(stage)),
        timestep_(timestep) {}

  const std::string& stage() const { return stage_; }
  int timestep() const { return timestep_; }

 private:
  std::string stage_;
  int timestep_;
};

}  // namespace fingertrack
