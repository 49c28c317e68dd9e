#include "frodo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frodo/error.hpp"

namespace frodo {

RocResult roc_auc(std::span<const LabeledScore> scores) {
  RocResult result;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) {
      fail(ErrorCode::NonFiniteData, "score for '" + s.sample_id + "' is not finite");
    }
    (s.label == BinaryLabel::Ood ? result.n_ood : result.n_in) += 1;
  }
  if (result.n_in == 0 || result.n_ood == 0) {
    fail(ErrorCode::DegenerateLabels, "ROC needs both in and ood samples (have " +
                                          std::to_string(result.n_in) + " in, " +
                                          std::to_string(result.n_ood) + " ood)");
  }

  std::vector<std::pair<double, BinaryLabel>> sorted;
  sorted.reserve(scores.size());
  for (const auto& s : scores) sorted.emplace_back(s.score, s.label);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n_in = static_cast<double>(result.n_in);
  const double n_ood = static_cast<double>(result.n_ood);
  result.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});

  // Walking thresholds downward: every in-sample not yet passed lies strictly
  // below the current tie group.
  std::size_t tp = 0;
  std::size_t fp = 0;
  double pairs = 0.0;  // (# ood > in) + 0.5 * (# tied), exact in double up to 2^53
  for (std::size_t i = 0; i < sorted.size();) {
    const double value = sorted[i].first;
    std::size_t group_ood = 0;
    std::size_t group_in = 0;
    for (; i < sorted.size() && sorted[i].first == value; ++i) {
      (sorted[i].second == BinaryLabel::Ood ? group_ood : group_in) += 1;
    }
    fp += group_in;
    tp += group_ood;
    const double in_below = static_cast<double>(result.n_in - fp);
    pairs += static_cast<double>(group_ood) * (in_below + 0.5 * static_cast<double>(group_in));
    result.points.push_back({static_cast<double>(fp) / n_in, static_cast<double>(tp) / n_ood, value});
  }
  result.auc = pairs / (n_in * n_ood);
  return result;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return area;
}

double recall_at(std::span<const double> ood_scores, double threshold) {
  if (ood_scores.empty()) fail(ErrorCode::DegenerateLabels, "no ood scores");
  const auto hits = std::count_if(ood_scores.begin(), ood_scores.end(),
                                  [threshold](double s) { return s >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(ood_scores.size());
}

double threshold_at_sensitivity(std::span<const double> ood_scores, double target) {
  if (ood_scores.empty()) fail(ErrorCode::DegenerateLabels, "no ood scores to calibrate on");
  if (!(target > 0.0 && target <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "sensitivity target must lie in (0, 1]");
  }
  std::vector<double> sorted(ood_scores.begin(), ood_scores.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) fail(ErrorCode::NonFiniteData, "ood score is not finite");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    const double value = sorted[i];
    while (i < sorted.size() && sorted[i] == value) ++i;
    if (static_cast<double>(i) / n >= target) return value;
  }
  return sorted.back();  // unreachable: the minimum always reaches recall 1
}

Confusion confusion_at(std::span<const LabeledScore> scores, double threshold) {
  if (!std::isfinite(threshold)) fail(ErrorCode::InvalidArgument, "threshold must be finite");
  Confusion c;
  for (const auto& s : scores) {
    const bool reject = s.score >= threshold;
    if (s.label == BinaryLabel::Ood) {
      (reject ? c.tp : c.fn) += 1;
    } else {
      (reject ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

}  // namespace frodo
