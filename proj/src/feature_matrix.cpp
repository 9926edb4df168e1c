#include "keyframe_dpc/feature_matrix.hpp"

#include <cmath>
#include <string>

#include "keyframe_dpc/error.hpp"

namespace kfdpc {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::string extractor_tag)
    : rows_(rows), cols_(cols), values_(std::move(values)), extractor_tag_(std::move(extractor_tag)) {
  if (rows_ == 0 || cols_ == 0) throw FormatError("feature matrix must have at least one row and column");
  if (values_.size() != rows_ * cols_) {
    throw FormatError("feature matrix holds " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(rows_ * cols_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw FormatError("non-finite feature at row " + std::to_string(k / cols_) + ", column " +
                        std::to_string(k % cols_));
    }
  }
}

FeatureMatrix FeatureMatrix::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > rows_) throw InvalidArgument("invalid row slice");
  std::vector<double> out(values_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                          values_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  return {end - begin, cols_, std::move(out), extractor_tag_};
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * cols_);
  for (auto i : indices) {
    if (i >= rows_) throw InvalidArgument("row index " + std::to_string(i) + " out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return {indices.size(), cols_, std::move(out), extractor_tag_};
}

}  // namespace kfdpc
