#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "topobench/core/types.hpp"

namespace topobench {

// Cosine similarity of unit descriptors mapped affinely from [-1, 1] to [0, 1].
double unit_similarity(std::span<const float> a, std::span<const float> b);

// Frame-pair similarity between a query sequence (rows) and a reference
// sequence (columns), in [0, 1].
class SimilaritySource {
 public:
  virtual ~SimilaritySource() = default;
  virtual double operator()(FrameIndex query, FrameIndex ref) const = 0;
  virtual std::size_t query_count() const = 0;
  virtual std::size_t ref_count() const = 0;
};

// Dense matrix, either precomputed from descriptors or supplied externally.
class SimilarityMatrix final : public SimilaritySource {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static SimilarityMatrix from_descriptors(const Sequence& query, const Sequence& ref);

  double operator()(FrameIndex query, FrameIndex ref) const override {
    return values_[query * cols_ + ref];
  }
  std::size_t query_count() const override { return rows_; }
  std::size_t ref_count() const override { return cols_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Computes similarities on demand from the descriptors of two live
// sequences. Used while a map grows and its frame list keeps extending.
class DescriptorSimilarity final : public SimilaritySource {
 public:
  DescriptorSimilarity(const Sequence& query, const Sequence& ref)
      : query_(&query), ref_(&ref) {}

  double operator()(FrameIndex query, FrameIndex ref) const override;
  std::size_t query_count() const override { return query_->size(); }
  std::size_t ref_count() const override { return ref_->size(); }

 private:
  const Sequence* query_;
  const Sequence* ref_;
};

}  // namespace topobench
