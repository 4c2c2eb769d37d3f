#pragma once

#include <stdexcept>
#include <string>

namespace feddaf {

/// Shapes of params, batches or vectors disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyDatasetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dirichlet partitioning could not give every client at least one row.
class PartitionInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration values, malformed plan files, unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter vector picked up a NaN or Inf during a run.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace feddaf
