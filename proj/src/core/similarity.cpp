#include "topobench/core/similarity.hpp"

#include <algorithm>

#include "topobench/core/error.hpp"

namespace topobench {

double unit_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw ValidationError("descriptor dimensions differ");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  // Float rounding can push |cos| marginally past 1.
  return std::clamp(0.5 * (dot + 1.0), 0.0, 1.0);
}

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DataError("similarity matrix payload does not match its shape");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("similarity values must lie in [0, 1]");
    }
  }
}

SimilarityMatrix SimilarityMatrix::from_descriptors(const Sequence& query, const Sequence& ref) {
  if (!query.has_descriptors() || !ref.has_descriptors()) {
    throw DataError("similarity from descriptors needs descriptors on both sequences");
  }
  std::vector<double> values(query.size() * ref.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      values[i * ref.size() + j] = unit_similarity(query[i].descriptor, ref[j].descriptor);
    }
  }
  return SimilarityMatrix(query.size(), ref.size(), std::move(values));
}

double DescriptorSimilarity::operator()(FrameIndex query, FrameIndex ref) const {
  return unit_similarity((*query_)[query].descriptor, (*ref_)[ref].descriptor);
}

}  // namespace topobench
