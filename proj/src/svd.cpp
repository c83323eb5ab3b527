#include "capaboost/svd.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "capaboost/errors.hpp"

namespace capaboost {

namespace {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

std::vector<double> singular_values(const Matrix& m) {
  if (m.empty()) throw ShapeError("singular_values: empty matrix");
  if (!m.all_finite()) throw NumericError("singular_values: non-finite entries");

  RowMajorMap mapped(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                     static_cast<Eigen::Index>(m.cols()));
  // Divide-and-conquer bidiagonal SVD; falls back to Jacobi for small sizes.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mapped);
  if (svd.info() != Eigen::Success) {
    throw NumericError("singular_values: decomposition did not converge");
  }
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw ConfigError("numerical_rank: rel_tol must lie in (0, 1)");
  }
  const std::vector<double> sv = singular_values(m);
  const double sigma_max = sv.empty() ? 0.0 : sv.front();
  if (sigma_max == 0.0) return 0;
  const double threshold = rel_tol * sigma_max;
  std::size_t rank = 0;
  for (double s : sv) {
    if (s > threshold) ++rank;
  }
  return rank;
}

}  // namespace capaboost
