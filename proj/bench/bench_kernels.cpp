// Serial reference vs OpenMP kernels over the same inputs.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "gridrouter/kernels.hpp"
#include "gridrouter/scenario_io.hpp"

using namespace gridrouter;
namespace k = gridrouter::kernels;

namespace {

std::vector<k::DqPoint> points(std::size_t n) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<k::DqPoint> pts(n);
    for (auto& p : pts) {
        p.v_feeder = phasor_from_polar(200 + 50 * u(rng), 0.2 * u(rng) - 0.1);
        p.v_bus = {230.0, 0.0};
        p.z = {0.05 + u(rng), 0.1 + u(rng)};
        p.cmd = {20 * u(rng) - 10, 20 * u(rng) - 10};
    }
    return pts;
}

std::vector<SmallSignalParams> params(std::size_t n) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SmallSignalParams> ps(n);
    for (auto& p : ps) p = {1e-4 + 1e-2 * u(rng), 0.01 + u(rng), 1e-4 + 1e-3 * u(rng), 1 + 200 * u(rng),
                            1 + 200 * u(rng), 1e-4 * u(rng), 0.1 * u(rng), 0.1 * u(rng)};
    return ps;
}

template <auto Kernel>
void dq_power(benchmark::State& st) {
    const auto pts = points(static_cast<std::size_t>(st.range(0)));
    std::vector<PowerPair> out(pts.size());
    for (auto _ : st) {
        Kernel(pts, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <auto Kernel>
void stability(benchmark::State& st) {
    const auto ps = params(static_cast<std::size_t>(st.range(0)));
    std::vector<k::StabilityResult> out(ps.size());
    for (auto _ : st) {
        Kernel(ps, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <auto Kernel>
void scenarios(benchmark::State& st) {
    auto s = parse_scenario(std::filesystem::path(GRIDROUTER_SOURCE_DIR) / "scenarios" / "dc_step_tracking.json")
                 .scenario;
    s.duration = 0.06;
    std::vector<Scenario> batch(static_cast<std::size_t>(st.range(0)), s);
    for (std::size_t i = 0; i < batch.size(); ++i)
        for (auto& f : batch[i].dc) f.feeder.module.k_p = 60.0 + 10.0 * static_cast<double>(i);
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(batch));
}

}  // namespace

BENCHMARK(dq_power<k::serial::dq_power>)->Name("dq_power/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(dq_power<k::parallel::dq_power>)->Name("dq_power/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(stability<k::serial::stability>)->Name("stability/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(stability<k::parallel::stability>)->Name("stability/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(scenarios<k::serial::run_scenarios>)->Name("run_scenarios/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(scenarios<k::parallel::run_scenarios>)->Name("run_scenarios/parallel")->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
