#include <benchmark/benchmark.h>

#include <omp.h>

#include "lmsvar/config.hpp"
#include "lmsvar/ensemble.hpp"

using namespace lmsvar;

namespace {

ExperimentSpec spec(std::size_t n_taps, bool nlms, std::size_t trials) {
    ExperimentSpec s;
    s.signal = {0.5, 1.0};
    s.plant = {synthetic_echo_path(n_taps, 8.0), {NoiseKind::Gaussian, 1e-6}};
    s.filter.n_taps = n_taps;
    if (nlms) {
        s.filter.algorithm = Nlms{0.1, default_nlms_regularizer(n_taps, 1.0)};
    } else {
        s.filter.algorithm = Lms{paper_step_size(n_taps, 1.0)};
    }
    s.iterations = 20000;
    s.trials = trials;
    s.master_seed = 1;
    return s;
}

void BM_Simulate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto s = spec(n, state.range(1) != 0, 1);
    const auto x = gen_ar1(s.signal, s.iterations, input_stream(1, 0));
    const auto r = gen_noise(s.plant.noise, s.iterations, noise_stream(1, 0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(s.plant, s.filter, x, r));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.iterations));
}
BENCHMARK(BM_Simulate)->ArgsProduct({{16, 64, 256}, {0, 1}})->ArgNames({"taps", "nlms"});

void BM_TrialsSerial(benchmark::State& state) {
    const auto s = spec(static_cast<std::size_t>(state.range(0)), false, 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trials_serial(s));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.trials * s.iterations));
}
BENCHMARK(BM_TrialsSerial)->Arg(64)->ArgName("taps")->Unit(benchmark::kMillisecond);

void BM_TrialsParallel(benchmark::State& state) {
    const auto s = spec(static_cast<std::size_t>(state.range(0)), false, 16);
    const int previous = omp_get_max_threads();
    omp_set_num_threads(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trials(s));
    }
    omp_set_num_threads(previous);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.trials * s.iterations));
}
BENCHMARK(BM_TrialsParallel)
    ->ArgsProduct({{64}, {1, 2, 4}})
    ->ArgNames({"taps", "threads"})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
