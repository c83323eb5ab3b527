#pragma once

#include <stdexcept>
#include <string>

namespace capaboost {

// Dimension disagreement between operands (matmul, hadamard, mask unions, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration values (bad density, N:M divisibility, missing seeds, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An operation was called outside its documented contract
// (e.g. merge on a nonlinear layer).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Numerical failure (SVD non-convergence, non-finite results).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace capaboost
