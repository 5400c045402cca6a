#include <benchmark/benchmark.h>

#include <vector>

#include "qdcav/device.hpp"
#include "qdcav/hom.hpp"

using namespace qdcav;

namespace {

PhononBath bath_at(double T) {
    PhononBath b;
    b.temperature_K = T;
    return b;
}

void BM_ZplFraction(benchmark::State& state) {
    const PhononBath b = bath_at(9.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(zpl_fraction(b));
    }
}
BENCHMARK(BM_ZplFraction);

void BM_SidebandSpectrum(benchmark::State& state) {
    const PhononBath b = bath_at(static_cast<double>(state.range(0)));
    std::vector<double> grid(4001);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -4000.0 + 2.0 * double(i);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sideband_spectrum(b, 1.0, 0.1, grid));
    }
}
BENCHMARK(BM_SidebandSpectrum)->Arg(0)->Arg(9)->Arg(20);

void BM_EmissionBudget(benchmark::State& state) {
    const auto d = device1();
    const PhononBath b = bath_at(10.0);
    const double gs = pure_dephasing_rate(d.qd, 10.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(effective_purcell_with_psb(d.cavity, d.qd, b, gs));
    }
}
BENCHMARK(BM_EmissionBudget);

void BM_QrtIndistinguishability(benchmark::State& state) {
    const auto gen = make_generator(12.0, -80.0, 90.0, 10.0, 0.2);
    const SolverOptions opt;
    for (auto _ : state) {
        const auto half = default_time_grid(gen, opt);
        std::vector<double> grid(2 * half.size() - 1);
        for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (half[1] - half[0]) * double(i);
        const auto traj = evolve_density_matrix(gen, grid, opt);
        const auto corr = two_time_correlator(traj, gen, CorrelatorKind::cavity_field, opt);
        benchmark::DoNotOptimize(indistinguishability_from_correlator(corr));
    }
}
BENCHMARK(BM_QrtIndistinguishability);

void BM_PeakTrainFit(benchmark::State& state) {
    SynthSpec spec;
    spec.programmed_I = 0.85;
    spec.programmed_g2 = 0.03;
    const auto h = synth_histogram(spec, 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_peak_train(h, -15.0, 615.0));
    }
}
BENCHMARK(BM_PeakTrainFit);

} // namespace

BENCHMARK_MAIN();
