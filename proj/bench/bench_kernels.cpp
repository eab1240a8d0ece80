// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to vary the team size.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ambs/kernels.hpp"
#include "ambs/shield.hpp"

using namespace ambs;

namespace {

Matrix random_chain(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += m(i, j) = u(rng) < 0.2 ? u(rng) : 0.0;
        if (sum == 0.0) m(i, i) = sum = 1.0;
        for (std::size_t j = 0; j < n; ++j) m(i, j) /= sum;
    }
    return m;
}

std::vector<char> safe_set(std::size_t n) {
    std::vector<char> safe(n, 1);
    for (std::size_t s = 0; s < n; s += 7) safe[s] = 0;
    return safe;
}

template <auto Kernel>
void bm_dp(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto chain = random_chain(n, 1);
    const auto safe = safe_set(n);
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(chain, safe, 30));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * n * 30));
}

template <auto Kernel>
void bm_enumerate(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto chain = random_chain(6, 2);
    const auto safe = safe_set(6);
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(chain, safe, 1, n));
}

template <auto Kernel>
void bm_traces(benchmark::State& st) {
    const auto m = static_cast<std::size_t>(st.range(0));
    const std::size_t n = 49;
    const TransitionSystem ts(random_chain(n, 3));
    std::vector<double> cost(n, 0.0), critic(n, 1.0);
    for (std::size_t s = 0; s < n; s += 7) cost[s] = 10.0;
    cost[1] = 0.0;
    const ShieldModel model(ts, cost, critic, critic);
    ShieldConfig cfg;
    cfg.num_samples = m;
    const auto batch = model.batch(1, std::nullopt, 42, 0);
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(batch, cfg, m));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m));
}

}  // namespace

BENCHMARK(bm_dp<kernels::bounded_safety_serial>)->Name("dp/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bm_dp<kernels::bounded_safety_parallel>)->Name("dp/parallel")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bm_enumerate<kernels::enumerate_safe_mass_serial>)->Name("enumerate/serial")->Arg(5)->Arg(7);
BENCHMARK(bm_enumerate<kernels::enumerate_safe_mass_parallel>)->Name("enumerate/parallel")->Arg(5)->Arg(7);
BENCHMARK(bm_traces<kernels::count_satisfying_traces_serial>)->Name("traces/serial")->Arg(128)->Arg(512)->Arg(4096);
BENCHMARK(bm_traces<kernels::count_satisfying_traces_parallel>)->Name("traces/parallel")->Arg(128)->Arg(512)->Arg(4096);

BENCHMARK_MAIN();
