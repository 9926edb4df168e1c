#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kfdpc {

/// Dense row-major matrix of per-frame feature vectors. Row i belongs to
/// frame i. Construction enforces N >= 1, D >= 1 and finite entries.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::string extractor_tag = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const { return values_; }
  const std::string& extractor_tag() const { return extractor_tag_; }

  /// Rows [begin, end) as a new matrix with the same tag.
  FeatureMatrix slice_rows(std::size_t begin, std::size_t end) const;

  /// Rows at the given indices, in the given order.
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.values_ == b.values_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::string extractor_tag_;
};

}  // namespace kfdpc
