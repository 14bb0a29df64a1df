// Serial reference vs OpenMP kernels on random frame sets.
//
//   ./build/bench/bench_kernels --benchmark_filter=posterior

#include <benchmark/benchmark.h>

#include <random>

#include "cfm/kernels.hpp"

namespace {

using namespace cfm;

Matrix6X random_frames(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix6X m(6, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Eigen::MatrixXd random_posterior(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0 / double(rows));
  Eigen::MatrixXd p(rows, cols);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

constexpr kernels::BlockWeights kWeights{2.0, 2.0, 0.5};

template <auto Fn>
void BM_posterior(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix6X x = random_frames(n, 1), y = random_frames(n, 2);
  kernels::PosteriorBuffers buf;
  for (auto _ : state) {
    Fn(x, y, kWeights, 1.0, buf);
    benchmark::DoNotOptimize(buf.p.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <auto Fn>
void BM_pair_sums(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix6X x = random_frames(n, 1), y = random_frames(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y));
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <auto Fn>
void BM_residuals(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix6X x = random_frames(n, 1), y = random_frames(n, 2);
  const Eigen::MatrixXd p = random_posterior(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y, p));
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <auto Fn>
void BM_cross_moment(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix2X x = random_frames(n, 1).topRows<2>();
  const Eigen::MatrixXd p = random_posterior(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, p));
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <auto Fn>
void BM_gaussian_kernel(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix2X y = random_frames(n, 1).bottomRows<2>();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(y, 2.0));
  state.SetItemsProcessed(state.iterations() * n * n);
}

#define CFM_BENCH_PAIR(name, kernel)                                                   \
  BENCHMARK_TEMPLATE(name, kernels::serial::kernel)->Name(#kernel "/serial")->RangeMultiplier(4)->Range(64, 1024); \
  BENCHMARK_TEMPLATE(name, kernels::omp::kernel)->Name(#kernel "/omp")->RangeMultiplier(4)->Range(64, 1024)

CFM_BENCH_PAIR(BM_posterior, posterior);
CFM_BENCH_PAIR(BM_pair_sums, pair_block_sums);
CFM_BENCH_PAIR(BM_residuals, weighted_block_residuals);
CFM_BENCH_PAIR(BM_cross_moment, cross_moment);
CFM_BENCH_PAIR(BM_gaussian_kernel, gaussian_kernel);

}  // namespace

BENCHMARK_MAIN();
