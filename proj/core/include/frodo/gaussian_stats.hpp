#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "frodo/layer.hpp"
#include "frodo/moments.hpp"
#include "frodo/tensor_io.hpp"

namespace frodo {

inline constexpr double kDefaultShrinkage = 0.01;

/// Channel vector of one sample at one layer.
struct PooledFeature {
  Layer layer;
  Eigen::VectorXd values;
};

/// Per-channel mean over all spatial positions, for any rank.
Eigen::VectorXd spatial_mean(const FeatureTensor& tensor);

/// Global average pooling over the spatial axes: values[c] is the mean of
/// tensor[h, w, c] over all (h, w). Throws ShapeError when the channel count
/// does not match the layer.
PooledFeature pool_spatial(const FeatureTensor& tensor, Layer layer);

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Attempts an in-place-free lower Cholesky factorization of a symmetric
/// matrix (only the lower triangle is read). Returns std::nullopt if a pivot
/// is not strictly positive.
std::optional<RowMajorMatrix> cholesky_lower(const Eigen::MatrixXd& a);

/// Solves L z = b by forward substitution for lower-triangular L.
Eigen::VectorXd forward_substitute(const RowMajorMatrix& lower,
                                   const Eigen::Ref<const Eigen::VectorXd>& b);

/// (1 - lambda) * cov + lambda * (tr(cov) / d) * I
Eigen::MatrixXd shrink_covariance(const Eigen::MatrixXd& cov, double lambda);

/// Fitted multivariate Gaussian with a shrinkage-regularized, factored
/// covariance. Immutable once built; safe to share across threads.
///
/// The factor is computed from (shrunk covariance + jitter * I). Jitter is
/// zero unless the plain factorization fails, in which case it starts at
/// 1e-10 * tr(cov)/d and doubles until it succeeds or exceeds
/// 1e-2 * tr(cov)/d (SingularCovariance).
class GaussianStats {
 public:
  static GaussianStats fit(const MomentAccumulator& moments, double lambda);

  static GaussianStats from_moments(std::size_t count, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                                    double lambda);

  /// Rebuilds from persisted parts using exactly the recorded jitter.
  static GaussianStats restore(std::size_t count, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                               double lambda, double jitter);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  std::size_t count() const noexcept { return count_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  double lambda() const noexcept { return lambda_; }
  double jitter_used() const noexcept { return jitter_; }
  const RowMajorMatrix& cholesky() const noexcept { return chol_; }

  /// Shrunk covariance plus jitter: the matrix the factor reconstructs.
  Eigen::MatrixXd regularized_covariance() const;

  /// (x - mean)^T Sigma_lambda^{-1} (x - mean) via forward substitution.
  /// Throws ShapeError on size mismatch, NonFiniteData on NaN/Inf input.
  double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  friend bool operator==(const GaussianStats& a, const GaussianStats& b) {
    return a.count_ == b.count_ && a.lambda_ == b.lambda_ && a.jitter_ == b.jitter_ &&
           a.mean_ == b.mean_ && a.cov_ == b.cov_ && a.chol_ == b.chol_;
  }

 private:
  GaussianStats(std::size_t count, Eigen::VectorXd mean, Eigen::MatrixXd cov, double lambda,
                double jitter, RowMajorMatrix chol);

  static void check_inputs(std::size_t count, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, double lambda);

  std::size_t count_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double lambda_;
  double jitter_;
  RowMajorMatrix chol_;
};

struct LayerStats {
  Layer layer;
  GaussianStats gaussian;

  friend bool operator==(const LayerStats&, const LayerStats&) = default;
};

/// Streaming fitter for one layer; samples are folded in arrival order.
class LayerFitter {
 public:
  explicit LayerFitter(Layer layer);

  Layer layer() const noexcept { return layer_; }
  std::size_t count() const noexcept { return moments_.count(); }

  /// Throws ShapeError if the feature belongs to another layer or has the
  /// wrong length, NonFiniteData if it holds NaN/Inf.
  void push(const PooledFeature& feature);

  LayerStats finish(double lambda) const;

 private:
  Layer layer_;
  MomentAccumulator moments_;
};

/// Fits one layer's statistics over all samples, in order.
LayerStats fit_stats(std::span<const PooledFeature> samples, double lambda);

double mahalanobis_sq(const LayerStats& stats, const PooledFeature& x);

}  // namespace frodo
