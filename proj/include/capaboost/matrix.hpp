#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "capaboost/rng.hpp"

namespace capaboost {

// Dense real matrix, 64-bit entries, row-major storage.
//
// Matrices are immutable values after construction as far as the library is
// concerned: every operation below is a pure function returning a new matrix,
// so concurrent reads are safe.
class Matrix {
 public:
  Matrix() = default;  // empty; only valid as a placeholder
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  // Row-by-row literal, e.g. Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Standard matrix product; throws ShapeError unless a.cols == b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

// Elementwise product; throws ShapeError unless shapes match.
Matrix hadamard(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& m, double c);

double frobenius_norm(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

// i.i.d. standard normal entries drawn row-major from the stream.
Matrix gaussian(std::size_t rows, std::size_t cols, RngStream& stream);

}  // namespace capaboost
