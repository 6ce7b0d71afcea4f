// Serial reference kernels against their OpenMP forms.

#include <benchmark/benchmark.h>

#include "sepgl/kernels.hpp"
#include "sepgl/rng.hpp"

#include <random>

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    sepgl::CounterRng rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

template <void (*Kernel)(const Eigen::MatrixXd&, const Eigen::VectorXd&, Eigen::VectorXd&), bool Transposed>
void bm_gemv(benchmark::State& state)
{
    const Eigen::Index n = state.range(0);
    const Eigen::Index p = state.range(1);
    const Eigen::MatrixXd X = random_matrix(n, p, 1);
    const Eigen::VectorXd v = random_matrix(Transposed ? n : p, 1, 2).col(0);
    Eigen::VectorXd out;
    for (auto _ : state) {
        Kernel(X, v, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n * p);
}

template <void (*Kernel)(const Eigen::MatrixXd&, const Eigen::MatrixXd&, Eigen::MatrixXd&)>
void bm_mul_lower_t(benchmark::State& state)
{
    const Eigen::Index n = state.range(0);
    const Eigen::Index p = state.range(1);
    const Eigen::MatrixXd Z = random_matrix(n, p, 3);
    const Eigen::MatrixXd L = random_matrix(p, p, 4).triangularView<Eigen::Lower>();
    Eigen::MatrixXd out;
    for (auto _ : state) {
        Kernel(Z, L, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n * p * (p + 1) / 2);
}

void shapes(benchmark::internal::Benchmark* b)
{
    b->Args({500, 402})->Args({400, 240})->Args({1000, 1000})->Unit(benchmark::kMicrosecond);
}

} // namespace

BENCHMARK(bm_gemv<sepgl::kernels::serial::gemv, false>)->Name("gemv/serial")->Apply(shapes);
BENCHMARK(bm_gemv<sepgl::kernels::parallel::gemv, false>)->Name("gemv/parallel")->Apply(shapes);
BENCHMARK(bm_gemv<sepgl::kernels::serial::gemv_t, true>)->Name("gemv_t/serial")->Apply(shapes);
BENCHMARK(bm_gemv<sepgl::kernels::parallel::gemv_t, true>)->Name("gemv_t/parallel")->Apply(shapes);
BENCHMARK(bm_mul_lower_t<sepgl::kernels::serial::mul_lower_t>)->Name("mul_lower_t/serial")->Apply(shapes);
BENCHMARK(bm_mul_lower_t<sepgl::kernels::parallel::mul_lower_t>)->Name("mul_lower_t/parallel")->Apply(shapes);

BENCHMARK_MAIN();
