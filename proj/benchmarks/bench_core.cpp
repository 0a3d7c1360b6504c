#include <benchmark/benchmark.h>

#include "scolab/divergence.hpp"
#include "scolab/families.hpp"
#include "scolab/net.hpp"
#include "scolab/rademacher.hpp"
#include "scolab/solver.hpp"
#include "scolab/sweep.hpp"

using namespace scolab;

namespace {

void BM_Project(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const NormBall ball = NormBall::l1(d);
  Vector x = Vector::Random(d) * 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(project(ball, x));
}
BENCHMARK(BM_Project)->Arg(4)->Arg(64)->Arg(1024);

void BM_BuildNet(benchmark::State& state) {
  const NormBall ball = NormBall::l2(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_net(ball, 0.25, 5000, 3).points.size());
}
BENCHMARK(BM_BuildNet)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_MinimizeEmpiricalQuadratic(benchmark::State& state) {
  const InstancePtr q = make_quadratic_instance(
      {Vector::Constant(3, 0.5), Vector::Constant(3, -0.2), Vector::Unit(3, 1)}, NormBall::l1(3));
  const Sample s = draw_sample(*q, static_cast<std::size_t>(state.range(0)), 9);
  for (auto _ : state)
    benchmark::DoNotOptimize(minimize_empirical(*q, s, 1e-3, {.use_closed_form = false}).value);
}
BENCHMARK(BM_MinimizeEmpiricalQuadratic)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_HardEmpiricalLoss(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const InstancePtr h = make_hard_instance(d, 0.25, 1 << ((d + 3) / 4), 3);
  const Sample s = draw_sample(*h, 1000, 5);
  const Vector x = h->structured_points().front();
  for (auto _ : state) benchmark::DoNotOptimize(empirical_loss(*h, s, x));
}
BENCHMARK(BM_HardEmpiricalLoss)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_RadExact(benchmark::State& state) {
  const NormBall ball = NormBall::l2(3);
  std::vector<Vector> S;
  for (int j = 0; j < state.range(0); ++j) S.push_back(Vector::Random(3) / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(rad_exact(ball, S).value);
}
BENCHMARK(BM_RadExact)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_FailureProbabilityCoin(benchmark::State& state) {
  SweepConfig cfg;
  cfg.family = {{"family", "coin"}, {"eps0", 0.1}};
  cfg.d_grid = {1};
  cfg.eps_grid = {0.3};
  cfg.n_grid = {100};
  cfg.trials = 100;
  cfg.seed = 1;
  const CellSetup cell = prepare_cell(cfg, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(failure_probability(cfg, cell, 100).failures);
}
BENCHMARK(BM_FailureProbabilityCoin)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
