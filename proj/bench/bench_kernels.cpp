// OpenMP kernels against their serial references, plus one full inner sweep
// for scale. Thread count follows OMP_NUM_THREADS.

#include "lhr/admm.hpp"
#include "lhr/kernels.hpp"
#include "lhr/synthbench.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using lhr::Matrix;

Matrix random_matrix(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (Eigen::Index k = 0; k < m.size(); ++k)
    m.data()[k] = normal(rng);
  return m;
}

template <bool Parallel> void BM_shrink(benchmark::State &state) {
  const Eigen::Index n = state.range(0);
  const Matrix y = random_matrix(n, 1);
  const Matrix w = random_matrix(n, 2).cwiseAbs();
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel)
      lhr::kernels::shrink(y, w, 0.1, 0.5, out);
    else
      lhr::kernels::serial::shrink(y, w, 0.1, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * y.size());
}

template <bool Parallel> void BM_inverse_abs_plus(benchmark::State &state) {
  const Matrix e = random_matrix(state.range(0), 3);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel)
      lhr::kernels::inverse_abs_plus(e, 0.1, out);
    else
      lhr::kernels::serial::inverse_abs_plus(e, 0.1, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * e.size());
}

template <bool Parallel> void BM_logsum(benchmark::State &state) {
  const Matrix m = random_matrix(state.range(0), 4);
  for (auto _ : state) {
    double v = Parallel ? lhr::kernels::logsum(m, 0.1)
                        : lhr::kernels::serial::logsum(m, 0.1);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * m.size());
}

template <bool Parallel> void BM_weighted_l1(benchmark::State &state) {
  const Matrix w = random_matrix(state.range(0), 5).cwiseAbs();
  const Matrix e = random_matrix(state.range(0), 6);
  for (auto _ : state) {
    double v = Parallel ? lhr::kernels::weighted_l1(w, e)
                        : lhr::kernels::serial::weighted_l1(w, e);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * e.size());
}

void BM_inner_solve(benchmark::State &state) {
  const Eigen::Index n = state.range(0);
  const lhr::PlantedInstance inst =
      lhr::make_instance_with_rank(n, n, static_cast<int>(n / 10), 0.1, 7);
  lhr::SolverConfig cfg = lhr::resolve_config(lhr::SolverConfig{}, inst.p,
                                              lhr::Program::Rpca);
  cfg.innerMaxIters = 20;
  const lhr::WeightSet w =
      lhr::initial_weights(n, n, *cfg.delta1, *cfg.delta2);
  for (auto _ : state) {
    lhr::InnerResult r = lhr::rpca_inner_solve(inst.p, w, cfg);
    benchmark::DoNotOptimize(r.a.data());
  }
  state.counters["sweeps"] = 20;
}

} // namespace

BENCHMARK(BM_shrink<true>)->Name("shrink/openmp")->Arg(200)->Arg(1000);
BENCHMARK(BM_shrink<false>)->Name("shrink/serial")->Arg(200)->Arg(1000);
BENCHMARK(BM_inverse_abs_plus<true>)
    ->Name("inverse_abs_plus/openmp")
    ->Arg(200)
    ->Arg(1000);
BENCHMARK(BM_inverse_abs_plus<false>)
    ->Name("inverse_abs_plus/serial")
    ->Arg(200)
    ->Arg(1000);
BENCHMARK(BM_logsum<true>)->Name("logsum/openmp")->Arg(200)->Arg(1000);
BENCHMARK(BM_logsum<false>)->Name("logsum/serial")->Arg(200)->Arg(1000);
BENCHMARK(BM_weighted_l1<true>)->Name("weighted_l1/openmp")->Arg(200)->Arg(1000);
BENCHMARK(BM_weighted_l1<false>)
    ->Name("weighted_l1/serial")
    ->Arg(200)
    ->Arg(1000);
BENCHMARK(BM_inner_solve)->Name("rpca_inner_solve/20_sweeps")->Arg(100)->Arg(200)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
