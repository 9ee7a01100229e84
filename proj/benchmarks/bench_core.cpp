#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "ptrap/dynamics.hpp"
#include "ptrap/field_solver.hpp"
#include "ptrap/mathieu.hpp"
#include "ptrap/multipole_fit.hpp"
#include "ptrap/spectral.hpp"

using namespace ptrap;

static void BM_SolveIdeal(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ElectrodeMask mask = discretize_geometry(TrapGeometry::ideal(0.020), GridSpec{n, n, n, 0.030});
    for (auto _ : state) benchmark::DoNotOptimize(solve_laplace(mask, SolverOptions{}).values.data());
}
BENCHMARK(BM_SolveIdeal)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

static void BM_FitQuadrupole(benchmark::State& state) {
    const ElectrodeMask mask = discretize_geometry(TrapGeometry::ideal(0.020), GridSpec{65, 65, 65, 0.030});
    const PotentialGrid g = solve_laplace(mask, SolverOptions{});
    for (auto _ : state) benchmark::DoNotOptimize(fit_multipoles(g, 0.005, 0.020).coefficients.alpha2);
}
BENCHMARK(BM_FitQuadrupole)->Unit(benchmark::kMicrosecond);

static void BM_BetaContinuedFraction(benchmark::State& state) {
    double q = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(beta_continued_fraction({0.01, q, Axis::z}));
        q = q > 0.8 ? 0.1 : q + 0.01;
    }
}
BENCHMARK(BM_BetaContinuedFraction);

static void BM_Simulate(benchmark::State& state) {
    const TrapGeometry geom = make_paper_trap();
    const OperatingPoint op = OperatingPoint::at_hz(-5.3, 700.0, 500e3);
    IntegrationConfig cfg;
    cfg.rf_periods = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            simulate_trajectory(paper_table_coefficients(), geom, IonSpecies::europium151(), op, cfg).positions.data());
}
BENCHMARK(BM_Simulate)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_SpectrumPeak(benchmark::State& state) {
    const std::size_t n = 204800;
    const double dt = 1.0 / (500e3 * 100);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2.0 * M_PI * 53.6e3 * dt * static_cast<double>(i));
    for (auto _ : state)
        benchmark::DoNotOptimize(find_secular_peak(spectrum_of_series(s, dt), 500e3).frequency);
}
BENCHMARK(BM_SpectrumPeak)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
