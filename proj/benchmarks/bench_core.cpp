#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "bicmppi/bic.hpp"
#include "bicmppi/clustering.hpp"
#include "bicmppi/mppi.hpp"

using namespace bicmppi;

namespace {

constexpr double kPi = std::numbers::pi;

RolloutProblem arena() {
  static const auto grid = std::make_shared<OccupancyGrid>(OccupancyGrid::empty(50, 70, 0.1));
  return {make_model("diffdrive"),
          InputConstraint::box(Eigen::Vector2d(0.0, -kPi / 4), Eigen::Vector2d(1.0, kPi / 4)),
          StateConstraint(grid), 0.05};
}

const StateVector kStart = Eigen::Vector3d(1.5, 1.0, kPi / 2);
const StateVector kGoal = Eigen::Vector3d(2.5, 6.0, kPi / 2);

void BM_SampleBatch(benchmark::State& state) {
  const auto p = arena();
  const int samples = static_cast<int>(state.range(0));
  const int horizon = static_cast<int>(state.range(1));
  CostModel cost;
  cost.target = kGoal;
  const NoiseSpec noise{Eigen::Vector2d(0.25, 0.25), 10.0, 1};
  const auto base = ControlSequence::constant(Eigen::Vector2d(0.5, 0.0), horizon);
  for (auto _ : state) {
    auto batch = sample_batch(p, base, noise, samples, kStart, Direction::kForward, cost);
    benchmark::DoNotOptimize(batch.costs.data());
  }
  state.SetItemsProcessed(state.iterations() * samples * horizon);
}
BENCHMARK(BM_SampleBatch)->Args({512, 50})->Args({1024, 100})->Unit(benchmark::kMillisecond);

void BM_Dbscan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.15);
  Eigen::MatrixXd pts(n, 3);
  for (int i = 0; i < pts.size(); ++i) pts(i) = g(rng);
  for (auto _ : state) {
    auto labels = dbscan_labels(pts, 5, 0.05);
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(BM_Dbscan)->Arg(512)->Arg(1024)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_BicStep(benchmark::State& state) {
  const auto p = arena();
  BicSettings s;
  s.noise_variance = Eigen::Vector2d(0.25, 0.25);
  s.horizon_forward = 50;
  s.horizon_backward = 50;
  s.samples_forward = s.samples_backward = s.samples_guide = 512;
  s.terminal_weight = 1.0;
  s.stage_position_weight = 0.05;
  s.max_candidates = static_cast<int>(state.range(0));
  const auto zeros = ControlSequence::zeros(2, 50);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto r = bic_mppi_step(p, zeros, zeros, kStart, kGoal, s, seed++);
    benchmark::DoNotOptimize(r.control.inputs.data());
  }
}
BENCHMARK(BM_BicStep)->Arg(0)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
