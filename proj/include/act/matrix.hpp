// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace act {

/// Raised when an argument violates an operation's preconditions
/// (shape mismatch, out-of-range parameter, non-finite data).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of token features. One row per token.
///
/// Construction checks that the shape is nonempty and every entry is finite;
/// after that the matrix behaves as a plain value type.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  /// Zero-filled rows x cols matrix.
  FeatureMatrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major data. Throws ContractError if the length
  /// does not match or any value is NaN/Inf.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Convenience for small literals: {{1, 2}, {3, 4}}.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  /// Columns [first, first + count) of every row, copied.
  FeatureMatrix col_block(std::size_t first, std::size_t count) const;

  bool all_finite() const noexcept;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b. Throws ContractError when a.cols() != b.rows().
FeatureMatrix matmul(const FeatureMatrix& a, const FeatureMatrix& b);

/// a * b^T. Throws ContractError when a.cols() != b.cols().
FeatureMatrix matmul_transposed(const FeatureMatrix& a, const FeatureMatrix& b);

FeatureMatrix add(const FeatureMatrix& a, const FeatureMatrix& b);

FeatureMatrix identity(std::size_t n);

/// Concatenates blocks horizontally; all must share a row count.
FeatureMatrix hconcat(std::span<const FeatureMatrix> blocks);

double dot(std::span<const double> a, std::span<const double> b);

/// Throws ContractError(what) unless cond holds.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace act
