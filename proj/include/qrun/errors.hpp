#pragma once

#include <stdexcept>
#include <string>

namespace qrun {

// Tensor/parameter extents don't line up.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation request exceeds the qubit budget.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear system too ill-conditioned to trust.
struct ConditioningError : std::runtime_error {
  ConditioningError(const std::string& msg, double cond)
      : std::runtime_error(msg), condition(cond) {}
  double condition;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& msg, int epoch, double loss)
      : std::runtime_error(msg), epoch(epoch), last_finite_loss(loss) {}
  int epoch;
  double last_finite_loss;
};

}  // namespace qrun
