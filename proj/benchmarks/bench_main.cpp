#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <Eigen/Core>

#include "metadesign/dd_mrf.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/latent_model.hpp"
#include "metadesign/macro_fem.hpp"
#include "metadesign/problem.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

static void BM_Homogenize(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto cell = x_brace(n, n, 3.0, 2);
    for (auto _ : state) benchmark::DoNotOptimize(homogenize(cell));
}
BENCHMARK(BM_Homogenize)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_MacroAdjoint(benchmark::State& state) {
    const int nx = static_cast<int>(state.range(0)), ny = static_cast<int>(state.range(1));
    const auto p = bridge_problem(nx, ny);
    std::vector<StiffnessComponents> field(static_cast<std::size_t>(nx * ny), {0.8, 0.3, 0.7, 0.2});
    for (auto _ : state) benchmark::DoNotOptimize(adjoint_sensitivities(p, field));
}
BENCHMARK(BM_MacroAdjoint)->Args({10, 4})->Args({12, 8})->Args({40, 20});

static GridMrf random_mrf(int rows, int cols, int labels) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GridMrf m;
    m.rows = rows;
    m.cols = cols;
    for (int v = 0; v < m.node_count(); ++v) {
        std::vector<double> un(static_cast<std::size_t>(labels));
        for (auto& x : un) x = u(rng);
        m.unary.push_back(un);
    }
    auto table = [&] {
        Eigen::MatrixXd t(labels, labels);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
        return t;
    };
    for (int i = 0; i < rows * (cols - 1); ++i) m.horizontal.push_back(table());
    for (int i = 0; i < (rows - 1) * cols; ++i) m.vertical.push_back(table());
    return m;
}

static void BM_DdMrf(benchmark::State& state) {
    const auto m = random_mrf(4, 10, static_cast<int>(state.range(0)));
    DdOptions opts;
    opts.max_iters = 500;
    for (auto _ : state) benchmark::DoNotOptimize(dd_mrf_solve(m, opts));
}
BENCHMARK(BM_DdMrf)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_Encode(benchmark::State& state) {
    const LatentModel model(Architecture{}, 1);
    const auto cell = grid_lattice(50, 50, 3, 3);
    for (auto _ : state) benchmark::DoNotOptimize(model.encode(cell));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMicrosecond);

static void BM_Decode(benchmark::State& state) {
    const LatentModel model(Architecture{}, 1);
    const LatentVector z(16, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(model.decode(z));
}
BENCHMARK(BM_Decode)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
