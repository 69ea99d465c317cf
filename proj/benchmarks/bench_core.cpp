#include <benchmark/benchmark.h>

#include "mvdnmf/inference.hpp"
#include "mvdnmf/synthetic.hpp"

using namespace mvdnmf;

namespace {

SyntheticData planted(int n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.c = 4;
    spec.n_v = 2;
    spec.m = {30, 40};
    spec.dims = {4, 2, 4, 2};
    spec.sigma = 0.01;
    spec.seed = 1;
    return generate_synthetic(spec);
}

Hyperparams planted_hp(int max_iters) {
    Hyperparams hp;
    hp.dims = {4, 2, 4, 2};
    hp.seed = 1;
    hp.max_iters = max_iters;
    hp.rel_tol = 1e-12;
    return hp;
}

}  // namespace

static void BM_TotalObjective(benchmark::State& state) {
    const auto data = planted(static_cast<int>(state.range(0)));
    const Hyperparams hp = planted_hp(1);
    const FactorModel model = init_model(data.dataset, hp);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            objective::total_objective(model, data.dataset, hp).total);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TotalObjective)->RangeMultiplier(2)->Range(50, 400)->Complexity();

static void BM_BasisBlockUpdate(benchmark::State& state) {
    const auto data = planted(200);
    const Hyperparams hp = planted_hp(1);
    const FactorModel model = init_model(data.dataset, hp);
    for (auto _ : state) {
        FactorModel work = model;
        solver::StepPolicy policy = solver::StepPolicy::from(hp);
        benchmark::DoNotOptimize(solver::update_basis_block(
            work, data.dataset, hp, 0, objective::BlockKind::WCD, policy));
    }
}
BENCHMARK(BM_BasisBlockUpdate);

static void BM_FitIteration(benchmark::State& state) {
    const auto data = planted(static_cast<int>(state.range(0)));
    const Hyperparams hp = planted_hp(5);
    for (auto _ : state)
        benchmark::DoNotOptimize(solver::fit(data.dataset, hp).trace.iterations());
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitIteration)->RangeMultiplier(2)->Range(50, 200)->Complexity()
    ->Unit(benchmark::kMillisecond);

static void BM_SolveBcd(benchmark::State& state) {
    const auto data = planted(200);
    const Hyperparams hp = planted_hp(1);
    const FactorModel model = init_model(data.dataset, hp);
    for (auto _ : state)
        benchmark::DoNotOptimize(solver::solve_b_cd(model, data.dataset, hp));
}
BENCHMARK(BM_SolveBcd);

static void BM_FoldIn(benchmark::State& state) {
    const auto data = planted(200);
    Hyperparams hp = planted_hp(40);
    const auto fitted = solver::fit(data.dataset, hp);
    std::vector<Matrix> held_out;
    for (const Matrix& x : data.dataset.views) held_out.push_back(x.leftCols(40));
    hp.rel_tol = 1e-5;
    for (auto _ : state)
        benchmark::DoNotOptimize(fold_in(fitted.model, held_out, hp).iterations);
}
BENCHMARK(BM_FoldIn)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
