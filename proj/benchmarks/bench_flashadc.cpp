#include <flashadc/characterize.hpp>
#include <flashadc/comparator_backend.hpp>
#include <flashadc/montecarlo.hpp>

#include <benchmark/benchmark.h>

using namespace flashadc;

namespace {

MismatchModel bench_model() {
    MismatchModel m;
    m.sigma_cap_ratio = 0.002;
    m.sigma_amp_offset = 0.01;
    m.ios_residual_factor = 0.5;
    m.sigma_comp_offset = 0.04;
    m.sigma_jitter = 0.5e-12;
    m.tracking_bandwidth = 580e6;
    return m;
}

void BM_Convert(benchmark::State& state) {
    const auto t = build_topology({});
    const auto m = bench_model();
    const Converter conv(AnalogChain(t, m, draw_instance(m, t, 1)), LatchModel{}, 600e6, 1);
    const Stimulus s(SineInput{0.5, 0.75, coherent_frequency(600e6, 4096, 51e6), 0.1});
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(conv.convert(s, i++));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Convert);

void BM_BubbleCorrect(benchmark::State& state) {
    std::uint64_t w = (1ULL << 37) - 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bubble_correct(w ^ (1ULL << 20)));
        w = (w << 1) | 1;
        if (w == ~0ULL) w = 1;
    }
}
BENCHMARK(BM_BubbleCorrect);

void BM_SpectralMetrics(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto t = build_topology({});
    const Converter conv(AnalogChain(t, {}, DeviceInstance::nominal(t)), LatchModel{}, 600e6, 1);
    const double f = coherent_frequency(600e6, n, 51e6);
    std::vector<int> codes;
    for (const auto& c : conv.run(SineInput{0.5, 0.75, f, 0.1}, n)) codes.push_back(c.binary);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_metrics(codes, 600e6, f, n));
}
BENCHMARK(BM_SpectralMetrics)->Arg(4096)->Arg(65536);

void BM_Ensemble(benchmark::State& state) {
    EnsembleConfig cfg;
    cfg.topology = build_topology({});
    cfg.model = bench_model();
    cfg.n_trials = 1000;
    cfg.workers = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(cfg));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
