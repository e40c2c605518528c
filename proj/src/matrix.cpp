// SPDX-License-Identifier: Apache-2.0
#include "act/matrix.hpp"

#include <cmath>
#include <string>

namespace act {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 1, "FeatureMatrix: shape must be at least 1x1");
  data_.assign(rows * cols, 0.0);
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(rows >= 1 && cols >= 1, "FeatureMatrix: shape must be at least 1x1");
  require(data_.size() == rows * cols,
          "FeatureMatrix: data length " + std::to_string(data_.size()) + " != " +
              std::to_string(rows) + "x" + std::to_string(cols));
  require(all_finite(), "FeatureMatrix: non-finite entry");
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty() && !rows.front().empty(), "FeatureMatrix: empty literal");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    require(r.size() == cols, "FeatureMatrix: ragged literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return FeatureMatrix(rows.size(), cols, std::move(data));
}

FeatureMatrix FeatureMatrix::col_block(std::size_t first, std::size_t count) const {
  require(count >= 1 && first + count <= cols_, "col_block: range out of bounds");
  FeatureMatrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
  return out;
}

bool FeatureMatrix::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FeatureMatrix matmul(const FeatureMatrix& a, const FeatureMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  FeatureMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

FeatureMatrix matmul_transposed(const FeatureMatrix& a, const FeatureMatrix& b) {
  require(a.cols() == b.cols(), "matmul_transposed: feature dimensions differ");
  FeatureMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

FeatureMatrix add(const FeatureMatrix& a, const FeatureMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  FeatureMatrix out = a;
  auto dst = out.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

FeatureMatrix identity(std::size_t n) {
  FeatureMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

FeatureMatrix hconcat(std::span<const FeatureMatrix> blocks) {
  require(!blocks.empty(), "hconcat: no blocks");
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    require(b.rows() == rows, "hconcat: row counts differ");
    cols += b.cols();
  }
  FeatureMatrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, offset + j) = b(i, j);
    offset += b.cols();
  }
  return out;
}

}  // namespace act
