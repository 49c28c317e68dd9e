#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace frodo {

/// Single-pass mean and co-moment accumulator (Welford update, Chan et al.
/// pairwise merge). Only the lower triangle of the co-moment matrix is
/// maintained; covariance() returns the full symmetric matrix.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  std::size_t count() const noexcept { return count_; }

  /// Throws ShapeError if x.size() != dim().
  void push(const Eigen::Ref<const Eigen::VectorXd>& x);

  /// Folds another shard into this one. Merging is exact in real arithmetic
  /// but not bitwise equal to sequential pushes.
  void merge(const MomentAccumulator& other);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }

  /// Sample covariance with divisor n - 1. Throws InsufficientSamples if n < 2.
  Eigen::MatrixXd covariance() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd comoment_;  // lower triangle valid
  Eigen::VectorXd delta_;
};

}  // namespace frodo
