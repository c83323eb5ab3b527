#pragma once

#include <vector>

#include "capaboost/matrix.hpp"

namespace capaboost {

// Singular values of m in nonincreasing order, min(rows, cols) of them,
// all >= 0. Throws NumericError on non-convergence of the decomposition.
std::vector<double> singular_values(const Matrix& m);

// Count of singular values above rel_tol * sigma_max. A zero matrix has
// rank 0. rel_tol must lie in (0, 1); the 1e-8 default sits far above f64
// SVD noise (~1e-13) and far below the smallest generic nonzero singular
// value seen in desk-scale Gaussian factor products.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-8);

}  // namespace capaboost
