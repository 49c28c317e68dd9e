#include "frodo/moments.hpp"

#include <string>

#include "frodo/error.hpp"

namespace frodo {

MomentAccumulator::MomentAccumulator(std::size_t dim)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      comoment_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim))),
      delta_(static_cast<Eigen::Index>(dim)) {
  if (dim == 0) fail(ErrorCode::ShapeError, "accumulator dimension must be positive");
}

void MomentAccumulator::push(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != mean_.size()) {
    fail(ErrorCode::ShapeError, "sample has dimension " + std::to_string(x.size()) +
                                    ", accumulator expects " + std::to_string(mean_.size()));
  }
  ++count_;
  const double n = static_cast<double>(count_);
  delta_ = x - mean_;
  mean_ += delta_ / n;
  // delta * (x - new_mean)^T == ((n - 1) / n) * delta * delta^T
  if (count_ > 1) comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta_, (n - 1.0) / n);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.dim() != dim()) fail(ErrorCode::ShapeError, "cannot merge accumulators of unequal dimension");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  delta_ = other.mean_ - mean_;
  mean_ += delta_ * (nb / n);
  comoment_.triangularView<Eigen::Lower>() += other.comoment_;
  comoment_.selfadjointView<Eigen::Lower>().rankUpdate(delta_, na * nb / n);
  count_ += other.count_;
}

Eigen::MatrixXd MomentAccumulator::covariance() const {
  if (count_ < 2) {
    fail(ErrorCode::InsufficientSamples,
         "covariance needs at least 2 samples, have " + std::to_string(count_));
  }
  Eigen::MatrixXd cov = comoment_.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(count_ - 1);
  return cov;
}

}  // namespace frodo
