#include <benchmark/benchmark.h>

#include <cmath>

#include "infharnack/grid_solver.hpp"
#include "infharnack/growth_profile.hpp"
#include "infharnack/radial_ode.hpp"

using namespace infharnack;

namespace {

NonlinearityPair cubic() { return {ScalarFunction::power(2, 3), ScalarFunction::zero(), 0}; }

void BM_StencilSweep(benchmark::State& state) {
    StencilOptions st;
    st.interp = state.range(1) ? Interp::Cubic : Interp::Linear;
    const auto g = make_grid(Rectangle{-1, -1, 1, 1}, static_cast<int>(state.range(0)), st);
    const auto v = sample(g, [](Point p) { return p.x * p.x - 0.5 * p.y * p.y + p.x * p.y; });
    const auto& interior = g->interior();
    for (auto _ : state) {
        double acc = 0;
        for (long k : interior) acc += stencil_extrema(v, k).op;
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(interior.size()));
}
BENCHMARK(BM_StencilSweep)->Args({65, 0})->Args({129, 0})->Args({65, 1})->Unit(benchmark::kMillisecond);

void BM_Psi(benchmark::State& state) {
    const GrowthProfile prof(cubic());
    double t = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(prof.psi(t).value);
        t = t < 100 ? t * 1.1 : 0.5;
    }
}
BENCHMARK(BM_Psi);

void BM_SolveIvp(benchmark::State& state) {
    const auto pair = cubic();
    for (auto _ : state) benchmark::DoNotOptimize(solve_ivp(pair, 1.0).R_hi);
}
BENCHMARK(BM_SolveIvp);

void BM_SolveDirichlet(benchmark::State& state) {
    DirichletSpec spec;
    spec.pair = cubic();
    spec.boundary = [](Point p) { return 1 + 4 * p.x; };
    SolverOptions so;
    so.tol = 1e-9;
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_cascade(spec, n, so).total_iterations);
}
BENCHMARK(BM_SolveDirichlet)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
