#pragma once

#include <stdexcept>
#include <string>

namespace sqsplat {

struct DegenerateRotation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCloud : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfOrderRecord : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingAssembly : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyStream : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sqsplat
