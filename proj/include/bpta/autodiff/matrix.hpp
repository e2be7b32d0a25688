// Copyright 2026 The BPTA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bpta/error.hpp"

namespace bpta::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
  }
};

// Dense row-major matrix; rows are the batch axis.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() == 0 ? 0 : rows.begin()->size());
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw ShapeError("Matrix::from_rows", "ragged rows");
      std::copy(row.begin(), row.end(), m.data_.begin() + r * m.cols_);
      ++r;
    }
    return m;
  }

  static Matrix row(std::initializer_list<double> values) {
    Matrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
  }

  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Shape shape() const noexcept { return {rows_, cols_}; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  // Scalar value of a 1x1 matrix.
  double item() const {
    if (rows_ != 1 || cols_ != 1) throw ShapeError("Matrix::item", "not a scalar " + shape().str());
    return data_[0];
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix& operator+=(const Matrix& other) {
    if (shape() != other.shape()) {
      throw ShapeError("Matrix::+=", shape().str() + " vs " + other.shape().str());
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  // Rows [begin, end).
  Matrix slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows_) throw ShapeError("Matrix::slice_rows", "range out of bounds");
    Matrix out(end - begin, cols_);
    std::copy(data_.begin() + begin * cols_, data_.begin() + end * cols_, out.data_.begin());
    return out;
  }

  Matrix transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One-hot rows for categorical indices.
inline Matrix one_hot(std::span<const std::size_t> indices, std::size_t classes) {
  Matrix out(indices.size(), classes);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= classes) throw DomainError("one_hot", "index out of range");
    out(r, indices[r]) = 1.0;
  }
  return out;
}

// Rows stacked vertically; all inputs share a column count.
inline Matrix vstack(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts[0].cols()) throw ShapeError("vstack", "column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, parts[0].cols());
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + offset);
    offset += p.size();
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff", a.shape().str() + " vs " + b.shape().str());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace kernel {

// out = a * b. The inner accumulation order over the shared dimension is
// fixed and independent of the row count, so a row produces the same bits
// whether it is evaluated alone or inside a large batch.
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  out = Matrix(n, m);
  const double* bp = b.data().data();
  double* op = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data().data() + i * k;
    double* orow = op + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* brow = bp + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += g * b^T
inline void matmul_nt_acc(const Matrix& g, const Matrix& b, Matrix& out) {
  const std::size_t n = g.rows(), m = g.cols(), k = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* gr = g.data().data() + i * m;
    double* orow = out.data().data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* br = b.data().data() + p * m;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += gr[j] * br[j];
      orow[p] += s;
    }
  }
}

// out += a^T * g
inline void matmul_tn_acc(const Matrix& a, const Matrix& g, Matrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = g.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data().data() + i * k;
    const double* gr = g.data().data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      if (av == 0.0) continue;
      double* orow = out.data().data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * gr[j];
    }
  }
}

}  // namespace kernel

}  // namespace bpta::ad
