#include "frodo/gaussian_stats.hpp"

#include <cmath>
#include <string>

#include "frodo/error.hpp"

namespace frodo {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterLimit = 1e-2;

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& x, const char* what) {
  if (!x.allFinite()) fail(ErrorCode::NonFiniteData, std::string(what) + " contains NaN or Inf");
}

}  // namespace

Eigen::VectorXd spatial_mean(const FeatureTensor& tensor) {
  const std::size_t channels = tensor.channels();
  const std::size_t positions = tensor.height() * tensor.width();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels));
  const auto data = tensor.data();
  for (std::size_t p = 0; p < positions; ++p) {
    const float* row = data.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) sums[static_cast<Eigen::Index>(c)] += row[c];
  }
  return sums / static_cast<double>(positions);
}

PooledFeature pool_spatial(const FeatureTensor& tensor, Layer layer) {
  if (tensor.channels() != expected_channels(layer)) {
    fail(ErrorCode::ShapeError, "layer " + std::string(layer_name(layer)) + " expects " +
                                    std::to_string(expected_channels(layer)) +
                                    " channels, tensor has " + std::to_string(tensor.channels()));
  }
  return PooledFeature{layer, spatial_mean(tensor)};
}

std::optional<RowMajorMatrix> cholesky_lower(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  RowMajorMatrix lower = RowMajorMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double s = a(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j));
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
        lower(i, i) = std::sqrt(s);
      } else {
        lower(i, j) = s / lower(j, j);
      }
    }
  }
  return lower;
}

Eigen::VectorXd forward_substitute(const RowMajorMatrix& lower,
                                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Eigen::Index n = lower.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = (b[i] - lower.row(i).head(i).dot(z.head(i))) / lower(i, i);
  }
  return z;
}

Eigen::MatrixXd shrink_covariance(const Eigen::MatrixXd& cov, double lambda) {
  const double d = static_cast<double>(cov.rows());
  const double scale = cov.trace() / d;
  Eigen::MatrixXd shrunk = (1.0 - lambda) * cov;
  shrunk.diagonal().array() += lambda * scale;
  return shrunk;
}

GaussianStats::GaussianStats(std::size_t count, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                             double lambda, double jitter, RowMajorMatrix chol)
    : count_(count),
      mean_(std::move(mean)),
      cov_(std::move(cov)),
      lambda_(lambda),
      jitter_(jitter),
      chol_(std::move(chol)) {}

void GaussianStats::check_inputs(std::size_t count, const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& cov, double lambda) {
  if (count < 2) {
    fail(ErrorCode::InsufficientSamples,
         "fitting needs at least 2 samples, have " + std::to_string(count));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "shrinkage lambda must lie in [0, 1]");
  }
  if (mean.size() == 0 || cov.rows() != mean.size() || cov.cols() != mean.size()) {
    fail(ErrorCode::ShapeError, "mean/covariance dimensions disagree");
  }
  require_finite(mean, "mean");
  if (!cov.allFinite()) fail(ErrorCode::NonFiniteData, "covariance contains NaN or Inf");
}

GaussianStats GaussianStats::fit(const MomentAccumulator& moments, double lambda) {
  if (moments.count() < 2) {
    fail(ErrorCode::InsufficientSamples,
         "fitting needs at least 2 samples, have " + std::to_string(moments.count()));
  }
  return from_moments(moments.count(), moments.mean(), moments.covariance(), lambda);
}

GaussianStats GaussianStats::from_moments(std::size_t count, Eigen::VectorXd mean,
                                          Eigen::MatrixXd cov, double lambda) {
  check_inputs(count, mean, cov, lambda);
  Eigen::MatrixXd shrunk = shrink_covariance(cov, lambda);
  if (auto chol = cholesky_lower(shrunk)) {
    return GaussianStats(count, std::move(mean), std::move(cov), lambda, 0.0, std::move(*chol));
  }
  const double scale = shrunk.trace() / static_cast<double>(shrunk.rows());
  if (scale > 0.0 && std::isfinite(scale)) {
    for (double jitter = kJitterStart * scale; jitter <= kJitterLimit * scale; jitter *= 2.0) {
      Eigen::MatrixXd jittered = shrunk;
      jittered.diagonal().array() += jitter;
      if (auto chol = cholesky_lower(jittered)) {
        return GaussianStats(count, std::move(mean), std::move(cov), lambda, jitter,
                             std::move(*chol));
      }
    }
  }
  fail(ErrorCode::SingularCovariance,
       "covariance is not positive definite even at maximum jitter (d=" +
           std::to_string(cov.rows()) + ", n=" + std::to_string(count) + ")");
}

GaussianStats GaussianStats::restore(std::size_t count, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                                     double lambda, double jitter) {
  check_inputs(count, mean, cov, lambda);
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    fail(ErrorCode::InvalidArgument, "jitter must be a non-negative finite number");
  }
  Eigen::MatrixXd regularized = shrink_covariance(cov, lambda);
  regularized.diagonal().array() += jitter;
  auto chol = cholesky_lower(regularized);
  if (!chol) {
    fail(ErrorCode::SingularCovariance, "stored covariance does not factor with recorded jitter");
  }
  return GaussianStats(count, std::move(mean), std::move(cov), lambda, jitter, std::move(*chol));
}

Eigen::MatrixXd GaussianStats::regularized_covariance() const {
  Eigen::MatrixXd regularized = shrink_covariance(cov_, lambda_);
  regularized.diagonal().array() += jitter_;
  return regularized;
}

double GaussianStats::mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != mean_.size()) {
    fail(ErrorCode::ShapeError, "sample has dimension " + std::to_string(x.size()) +
                                    ", stats expect " + std::to_string(mean_.size()));
  }
  require_finite(x, "sample");
  const Eigen::VectorXd centered = x - mean_;
  return forward_substitute(chol_, centered).squaredNorm();
}

LayerFitter::LayerFitter(Layer layer) : layer_(layer), moments_(expected_channels(layer)) {}

void LayerFitter::push(const PooledFeature& feature) {
  if (feature.layer != layer_) {
    fail(ErrorCode::ShapeError, "fitter for " + std::string(layer_name(layer_)) +
                                    " received a feature from " +
                                    std::string(layer_name(feature.layer)));
  }
  require_finite(feature.values, "pooled feature");
  moments_.push(feature.values);
}

LayerStats LayerFitter::finish(double lambda) const {
  return LayerStats{layer_, GaussianStats::fit(moments_, lambda)};
}

LayerStats fit_stats(std::span<const PooledFeature> samples, double lambda) {
  if (samples.size() < 2) {
    fail(ErrorCode::InsufficientSamples,
         "fitting needs at least 2 samples, have " + std::to_string(samples.size()));
  }
  LayerFitter fitter(samples.front().layer);
  for (const auto& sample : samples) fitter.push(sample);
  return fitter.finish(lambda);
}

double mahalanobis_sq(const LayerStats& stats, const PooledFeature& x) {
  if (x.layer != stats.layer) {
    fail(ErrorCode::ShapeError, "feature from " + std::string(layer_name(x.layer)) +
                                    " scored against " + std::string(layer_name(stats.layer)) +
                                    " stats");
  }
  return stats.gaussian.mahalanobis_sq(x.values);
}

}  // namespace frodo
