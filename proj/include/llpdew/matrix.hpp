#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace llpdew {

/// Dense row-major matrix of doubles. Rows are instances, columns are
/// feature dimensions or classes. All numeric modules share this type.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void set_row(std::size_t i, std::span<const double> values) {
    if (values.size() != cols_) throw std::invalid_argument("set_row: width mismatch");
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = values[j];
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace llpdew
