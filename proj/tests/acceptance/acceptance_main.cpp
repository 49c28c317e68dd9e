// Acceptance suite. Runs every exit criterion and prints one PASS/FAIL line
// each. Pass criterion names as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frodo/commands.hpp"
#include "frodo/evaluation.hpp"
#include "frodo/gaussian_stats.hpp"
#include "frodo/scoring.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace frodo;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

GaussianStats fit_vectors(const std::vector<Eigen::VectorXd>& xs, double lambda) {
  MomentAccumulator acc(static_cast<std::size_t>(xs.front().size()));
  for (const auto& x : xs) acc.push(x);
  return GaussianStats::fit(acc, lambda);
}

// Mahalanobis oracle equivalence: 100 instances, d <= 10, n <= 100, 1e-8
// relative against an explicit inverse, under 5 s.
Outcome mahalanobis_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> dd(1, 10), nd(2, 100);
  double worst = 0.0;
  std::size_t checks = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t d = dd(rng);
    const std::size_t n = nd(rng);
    testing::GaussianSampler sampler(testing::random_normal(d, rng),
                                     testing::random_spd(d, rng, 0.1, 10.0));
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(sampler.draw(rng));
    const auto g = fit_vectors(xs, kDefaultShrinkage);

    const auto moments = oracle::two_pass(xs);
    Eigen::MatrixXd reg = oracle::shrink(moments.cov, kDefaultShrinkage);
    reg.diagonal().array() += g.jitter_used();
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = sampler.draw(rng) * 1.5;
      const double expected = oracle::mahalanobis_explicit(reg, moments.mean, x);
      worst = std::max(worst, oracle::relative_error(g.mahalanobis_sq(x), expected));
      ++checks;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-8 && elapsed < 5.0,
          fmt("%zu distances, worst relative error %.3g (tol 1e-8), %.2f s (limit 5 s)", checks,
              worst, elapsed)};
}

// Streaming covariance equals two-pass: 50 instances, n <= 200, d <= 8, 1e-10.
Outcome streaming_covariance() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> dd(1, 8), nd(2, 200);
  std::uniform_real_distribution<double> offset(-100.0, 100.0);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t d = dd(rng);
    const std::size_t n = nd(rng);
    testing::GaussianSampler sampler(
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), offset(rng)),
        testing::random_spd(d, rng, 0.01, 100.0));
    MomentAccumulator acc(d);
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(sampler.draw(rng));
      acc.push(xs.back());
    }
    const auto expected = oracle::two_pass(xs);
    worst = std::max(worst, oracle::relative_frobenius(acc.covariance(), expected.cov));
  }
  return {worst <= 1e-10, fmt("50 instances, worst relative Frobenius error %.3g (tol 1e-10)", worst)};
}

// Chi-square sanity: 10,000 fitting draws at d = 16; mean held-out squared
// distance within 5% of 16.
Outcome chi_square() {
  std::mt19937_64 rng(303);
  const std::size_t d = 16;
  testing::GaussianSampler sampler(testing::random_normal(d, rng) * 3.0,
                                   testing::random_spd(d, rng, 0.5, 4.0));
  MomentAccumulator acc(d);
  for (int i = 0; i < 10000; ++i) acc.push(sampler.draw(rng));
  const auto g = GaussianStats::fit(acc, kDefaultShrinkage);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) sum += g.mahalanobis_sq(sampler.draw(rng));
  const double mean = sum / 1000.0;
  const double rel = std::abs(mean - 16.0) / 16.0;
  return {rel <= 0.05, fmt("mean held-out distance %.4f vs d=16 (%.2f%% off, limit 5%%)", mean, 100 * rel)};
}

// AUC exactness: 100 random sets (<= 200 per class, some heavily tied),
// rank AUC == pairwise oracle and == trapezoid area, both to 1e-12.
Outcome auc_exactness() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> size(1, 200);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> coarse(0, 3);
  double worst_oracle = 0.0;
  double worst_area = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const int tie_mode = instance % 3;  // 0: continuous, 1: half-unit grid, 2: four values
    auto draw = [&](double shift) {
      if (tie_mode == 2) return static_cast<double>(coarse(rng)) + (shift > 0 && coarse(rng) == 0 ? 1 : 0);
      const double v = normal(rng) + shift;
      return tie_mode == 1 ? std::round(v * 2.0) / 2.0 : v;
    };
    std::vector<double> ood(size(rng)), in(size(rng));
    for (auto& v : ood) v = draw(0.8);
    for (auto& v : in) v = draw(0.0);
    std::vector<LabeledScore> scores;
    for (double s : ood) scores.push_back({"o", s, BinaryLabel::Ood});
    for (double s : in) scores.push_back({"i", s, BinaryLabel::In});
    const auto roc = roc_auc(scores);
    worst_oracle = std::max(worst_oracle, std::abs(roc.auc - oracle::pairwise_auc(ood, in)));
    worst_area = std::max(worst_area, std::abs(trapezoid_area(roc.points) - roc.auc));
  }
  return {worst_oracle <= 1e-12 && worst_area <= 1e-12,
          fmt("100 sets, max |auc - pairwise| %.3g, max |area - auc| %.3g (tol 1e-12)",
              worst_oracle, worst_area)};
}

// Synthetic replication: in ~ N(mu, Sigma), d = 32; OOD shifted by 3 standard
// deviations along a principal axis; baseline probabilities with overlapping
// confidence. Requires FRODO AUC >= 0.95 and > baseline AUC, under 10 s.
Outcome frodo_vs_baseline() {
  const auto start = Clock::now();
  std::mt19937_64 rng(505);
  const std::size_t d = 32;
  const Eigen::MatrixXd cov = testing::random_spd(d, rng, 0.5, 2.0);
  const Eigen::VectorXd mean = testing::random_normal(d, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index top = static_cast<Eigen::Index>(d) - 1;
  const Eigen::VectorXd axis = eig.eigenvectors().col(top);
  const double axis_sd = std::sqrt(eig.eigenvalues()[top]);

  testing::GaussianSampler in_dist(mean, cov);
  testing::GaussianSampler ood_dist(mean + 3.0 * axis_sd * axis, cov);

  MomentAccumulator acc(d);
  for (int i = 0; i < 5000; ++i) acc.push(in_dist.draw(rng));
  const auto g = GaussianStats::fit(acc, kDefaultShrinkage);

  // Top-class probability: in U(0.60, 1.00), OOD U(0.45, 0.85), giving the
  // baseline an AUC near 0.8.
  std::uniform_real_distribution<double> in_conf(0.60, 1.00), ood_conf(0.45, 0.85);
  std::vector<LabeledScore> frodo_scores, baseline_scores;
  for (int i = 0; i < 2000; ++i) {
    const bool ood = i % 2 == 1;
    const BinaryLabel label = ood ? BinaryLabel::Ood : BinaryLabel::In;
    const Eigen::VectorXd x = (ood ? ood_dist : in_dist).draw(rng);
    frodo_scores.push_back({"s", g.mahalanobis_sq(x), label});
    const double p = ood ? ood_conf(rng) : in_conf(rng);
    const std::vector<double> probs{p, 1.0 - p};
    baseline_scores.push_back({"s", baseline_msp(probs), label});
  }
  const double frodo_auc = roc_auc(frodo_scores).auc;
  const double baseline_auc = roc_auc(baseline_scores).auc;
  const double elapsed = seconds_since(start);
  return {frodo_auc >= 0.95 && frodo_auc > baseline_auc && elapsed < 10.0,
          fmt("FRODO AUC %.4f (need >= 0.95), baseline AUC %.4f, %.2f s (limit 10 s)", frodo_auc,
              baseline_auc, elapsed)};
}

// Calibration contract at 0.99 on synthetic OOD score sets.
Outcome calibration_contract() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> size(1, 2000);
  std::lognormal_distribution<double> dist(3.0, 0.5);
  std::size_t violations = 0;
  double min_recall = 1.0;
  for (int instance = 0; instance < 200; ++instance) {
    std::vector<double> ood(size(rng));
    for (auto& v : ood) v = instance % 2 ? std::round(dist(rng)) : dist(rng);
    const double t = threshold_at_sensitivity(ood, 0.99);
    const double recall = recall_at(ood, t);
    min_recall = std::min(min_recall, recall);
    if (recall < 0.99) ++violations;
    double next = std::numeric_limits<double>::infinity();
    for (double s : ood) {
      if (s > t) next = std::min(next, s);
    }
    if (std::isfinite(next) && recall_at(ood, next) >= 0.99) ++violations;
  }
  return {violations == 0,
          fmt("200 sets, min recall at threshold %.4f, %zu contract violations", min_recall, violations)};
}

int cli(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "frodo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (captured) *captured = out.str() + err.str();
  return code;
}

// End-to-end determinism: fit -> score -> eval twice on one synthetic
// manifest; bundle, scores CSV and report must be byte-identical.
Outcome end_to_end_determinism() {
  testing::TempDir dir("frodo-accept");
  testing::SyntheticSpec spec;
  spec.layers = {Layer::L1, Layer::L2};
  spec.n_in = 300;
  spec.n_ood = 60;
  spec.n_unlabeled = 10;
  const auto manifest = testing::write_synthetic_dataset(dir / "data", spec);
  const auto work = dir / "run";

  const std::vector<std::string> artifacts = {
      "stats/meta.json", "stats/L1.mean.ften", "stats/L1.cov.ften", "stats/L2.mean.ften",
      "stats/L2.cov.ften", "scores.csv", "scores.csv.json", "report.json",
      "roc/roc_L1.csv", "roc/roc_L2.csv", "roc/roc_fused.csv", "roc/roc_baseline.csv"};

  std::vector<std::string> first;
  for (int round = 0; round < 2; ++round) {
    std::string log;
    if (cli({"fit", "--manifest", manifest.string(), "--layers", "L1,L2", "--lambda", "0.01", "--out",
             (work / "stats").string()}, &log) != 0 ||
        cli({"score", "--manifest", manifest.string(), "--stats", (work / "stats").string(),
             "--fusion", "sum_raw", "--out", (work / "scores.csv").string()}, &log) != 0 ||
        cli({"eval", "--scores", (work / "scores.csv").string(), "--sensitivity", "0.99", "--out",
             (work / "report.json").string(), "--roc-dir", (work / "roc").string()}, &log) != 0) {
      return {false, "pipeline failed in round " + std::to_string(round + 1) + ": " + log};
    }
    std::vector<std::string> contents;
    for (const auto& name : artifacts) contents.push_back(testing::read_file(work / name));
    if (round == 0) {
      first = std::move(contents);
      std::filesystem::remove_all(work);
    } else {
      for (std::size_t i = 0; i < artifacts.size(); ++i) {
        if (first[i].empty() || first[i] != contents[i]) {
          return {false, artifacts[i] + " differs between runs"};
        }
      }
    }
  }
  return {true, fmt("%zu artifacts byte-identical across two runs", artifacts.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"mahalanobis_oracle", mahalanobis_oracle},
      {"streaming_covariance", streaming_covariance},
      {"chi_square", chi_square},
      {"auc_exactness", auc_exactness},
      {"frodo_vs_baseline", frodo_vs_baseline},
      {"calibration_contract", calibration_contract},
      {"end_to_end_determinism", end_to_end_determinism},
  };

  std::vector<std::string> selected(argv + 1, argv + argc);
  for (const auto& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.name == name; })) {
      std::cerr << "unknown criterion: " << name << '\n';
      return 2;
    }
  }

  int failures = 0;
  int ran = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), criterion.name) == selected.end()) {
      continue;
    }
    Outcome outcome{false, ""};
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << criterion.name << ": " << outcome.detail
              << std::endl;
  }
  std::cout << ran - failures << "/" << ran << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
