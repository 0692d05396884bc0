#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "convrot/errors.hpp"

namespace convrot {

// Dense row-major matrix. Value-semantic; equality is elementwise.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(size_t rows, size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(size_t rows, size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data size does not match rows*cols");
    }
  }

  // Row-major literal, e.g. Matrix<int>(2, 2, {1, 2, 3, 4}).
  Matrix(size_t rows, size_t cols, std::initializer_list<T> values)
      : Matrix(rows, cols, std::vector<T>(values)) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  const std::vector<T>& values() const { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixD = Matrix<double>;
using MatrixI8 = Matrix<int8_t>;
using MatrixI32 = Matrix<int32_t>;

}  // namespace convrot
