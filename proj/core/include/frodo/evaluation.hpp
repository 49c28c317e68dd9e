#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace frodo {

/// Positive class is out-of-distribution throughout.
enum class BinaryLabel { In, Ood };

struct LabeledScore {
  std::string sample_id;
  double score;  // higher = more out-of-distribution
  BinaryLabel label;
};

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;  // +inf for the leading (0, 0) point
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t n_in = 0;
  std::size_t n_ood = 0;
};

/// ROC over the distinct score values (predict ood iff score >= threshold),
/// from (0, 0) to (1, 1), one point per distinct score. The AUC is the
/// Mann-Whitney statistic with ties counted as one half, computed in
/// O(n log n). Throws DegenerateLabels unless both classes are present,
/// NonFiniteData on a non-finite score.
RocResult roc_auc(std::span<const LabeledScore> scores);

/// Trapezoidal area under the points of a curve.
double trapezoid_area(std::span<const RocPoint> points);

/// Largest observed score t with fraction(ood_scores >= t) >= target.
/// Throws DegenerateLabels on empty input, InvalidArgument if target is
/// outside (0, 1].
double threshold_at_sensitivity(std::span<const double> ood_scores, double target);

/// Fraction of scores >= threshold.
double recall_at(std::span<const double> ood_scores, double threshold);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Counts under the rule "reject (predict ood) iff score >= threshold".
Confusion confusion_at(std::span<const LabeledScore> scores, double threshold);

}  // namespace frodo
