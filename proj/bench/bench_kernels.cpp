#include <benchmark/benchmark.h>

#include <random>

#include "vdx/kernels.hpp"

namespace {

using vdx::kernels::Exec;

struct AgreeInput {
    std::vector<std::vector<std::uint32_t>> columns;
    std::vector<std::uint32_t> goal;
};

AgreeInput agree_input(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(3);
    AgreeInput in;
    in.columns.resize(cols);
    for (auto& c : in.columns) {
        for (std::size_t r = 0; r < rows; ++r) c.push_back(static_cast<std::uint32_t>(rng() % 6));
    }
    for (std::size_t r = 0; r < rows; ++r) in.goal.push_back(static_cast<std::uint32_t>(rng() % 4));
    return in;
}

void agree_sets(benchmark::State& state, Exec exec) {
    auto in = agree_input(static_cast<std::size_t>(state.range(0)), 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vdx::kernels::maximal_agree_sets(in.columns, in.goal, exec));
    }
    state.SetComplexityN(state.range(0));
}

void count_matches(benchmark::State& state, Exec exec) {
    std::mt19937_64 rng(5);
    std::vector<vdx::Value> a, b;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        double x = static_cast<double>(rng() % 1000) / 7.0;
        a.emplace_back(x);
        b.emplace_back(rng() % 3 ? x : x + 1);
    }
    for (auto _ : state) benchmark::DoNotOptimize(vdx::kernels::count_matches(a, b, exec));
}

void group_stats(benchmark::State& state, Exec exec) {
    std::mt19937_64 rng(9);
    std::vector<std::uint32_t> groups;
    std::vector<double> values;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        groups.push_back(static_cast<std::uint32_t>(rng() % 50));
        values.push_back(static_cast<double>(rng() % 10000) / 100.0);
    }
    for (auto _ : state) benchmark::DoNotOptimize(vdx::kernels::group_stats(groups, values, 50, exec));
}

void BM_AgreeSetsSerial(benchmark::State& s) { agree_sets(s, Exec::Serial); }
void BM_AgreeSetsParallel(benchmark::State& s) { agree_sets(s, Exec::Parallel); }
void BM_CountMatchesSerial(benchmark::State& s) { count_matches(s, Exec::Serial); }
void BM_CountMatchesParallel(benchmark::State& s) { count_matches(s, Exec::Parallel); }
void BM_GroupStatsSerial(benchmark::State& s) { group_stats(s, Exec::Serial); }
void BM_GroupStatsParallel(benchmark::State& s) { group_stats(s, Exec::Parallel); }

}  // namespace

BENCHMARK(BM_AgreeSetsSerial)->Arg(200)->Arg(800);
BENCHMARK(BM_AgreeSetsParallel)->Arg(200)->Arg(800);
BENCHMARK(BM_CountMatchesSerial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_CountMatchesParallel)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_GroupStatsSerial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_GroupStatsParallel)->Arg(1 << 14)->Arg(1 << 18);

BENCHMARK_MAIN();
