#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "frodo/evaluation.hpp"
#include "frodo/gaussian_stats.hpp"
#include "frodo/moments.hpp"

namespace {

Eigen::VectorXd draw(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = normal(rng);
  return x;
}

frodo::MomentAccumulator filled(std::size_t d, std::size_t n) {
  std::mt19937_64 rng(1);
  frodo::MomentAccumulator acc(d);
  for (std::size_t i = 0; i < n; ++i) acc.push(draw(d, rng));
  return acc;
}

void BM_Push(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const auto x = draw(d, rng);
  frodo::MomentAccumulator acc(d);
  for (auto _ : state) acc.push(x);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Push)->Arg(64)->Arg(512)->Arg(2048);

void BM_Fit(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto acc = filled(d, 2 * d);
  for (auto _ : state) benchmark::DoNotOptimize(frodo::GaussianStats::fit(acc, 0.01));
}
BENCHMARK(BM_Fit)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Mahalanobis(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto g = frodo::GaussianStats::fit(filled(d, 2 * d), 0.01);
  std::mt19937_64 rng(3);
  const auto x = draw(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(g.mahalanobis_sq(x));
}
BENCHMARK(BM_Mahalanobis)->Arg(64)->Arg(512)->Arg(1024);

void BM_RocAuc(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<frodo::LabeledScore> scores;
  for (int64_t i = 0; i < state.range(0); ++i) {
    const bool ood = i % 4 == 0;
    scores.push_back({"s", normal(rng) + (ood ? 1.0 : 0.0),
                      ood ? frodo::BinaryLabel::Ood : frodo::BinaryLabel::In});
  }
  for (auto _ : state) benchmark::DoNotOptimize(frodo::roc_auc(scores));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
