// Serial reference kernels against their OpenMP counterparts.
//
//   bench_kernels --benchmark_filter=rotate_all

#include "gqw/kernels.hpp"
#include "gqw/problems.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

namespace {

using gqw::kernels::cplx;

std::vector<cplx> make_state(unsigned n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cplx> s(dim);
    const double a = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t z = 0; z < dim; ++z) s[z] = {a * std::cos(0.1 * z), a * std::sin(0.1 * z)};
    return s;
}

std::vector<double> make_energies(unsigned n) {
    std::vector<double> e(std::size_t{1} << n);
    for (std::size_t z = 0; z < e.size(); ++z) e[z] = static_cast<double>((z * 2654435761u) % 1000) / 10.0;
    return e;
}

template <auto Kernel>
void cost_phase(benchmark::State& st) {
    const auto n = static_cast<unsigned>(st.range(0));
    auto s = make_state(n);
    const auto e = make_energies(n);
    for (auto _ : st) {
        Kernel(s, e, 1e-3);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.size()));
}

template <auto Kernel>
void rotate_all(benchmark::State& st) {
    const auto n = static_cast<unsigned>(st.range(0));
    auto s = make_state(n);
    for (auto _ : st) {
        Kernel(s, n, 1e-3);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.size()) * n);
}

void expectation_serial(benchmark::State& st) {
    const auto n = static_cast<unsigned>(st.range(0));
    const auto s = make_state(n);
    const auto e = make_energies(n);
    for (auto _ : st) benchmark::DoNotOptimize(gqw::kernels::serial::expectation(s, e));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.size()));
}

void expectation_omp(benchmark::State& st) {
    const auto n = static_cast<unsigned>(st.range(0));
    const auto s = make_state(n);
    const auto e = make_energies(n);
    for (auto _ : st) benchmark::DoNotOptimize(gqw::kernels::omp::expectation(s, e, true));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.size()));
}

template <auto Kernel>
void energies(benchmark::State& st) {
    const auto p = gqw::generate_instance(gqw::ProblemKind::exact_cover,
                                          {static_cast<std::size_t>(st.range(0))}, 1);
    for (auto _ : st) benchmark::DoNotOptimize(Kernel(p));
    st.SetItemsProcessed(st.iterations() * (std::int64_t{1} << st.range(0)));
}

}  // namespace

BENCHMARK(cost_phase<gqw::kernels::serial::cost_phase>)->Name("cost_phase/serial")->DenseRange(14, 20, 3);
BENCHMARK(cost_phase<gqw::kernels::omp::cost_phase>)->Name("cost_phase/omp")->DenseRange(14, 20, 3);
BENCHMARK(rotate_all<gqw::kernels::serial::rotate_all>)->Name("rotate_all/serial")->DenseRange(14, 20, 3);
BENCHMARK(rotate_all<gqw::kernels::omp::rotate_all>)->Name("rotate_all/omp")->DenseRange(14, 20, 3);
BENCHMARK(expectation_serial)->Name("expectation/serial")->DenseRange(14, 20, 3);
BENCHMARK(expectation_omp)->Name("expectation/omp")->DenseRange(14, 20, 3);
BENCHMARK(energies<gqw::kernels::serial::energies>)->Name("energies/serial")->DenseRange(12, 18, 3);
BENCHMARK(energies<gqw::kernels::omp::energies>)->Name("energies/omp")->DenseRange(12, 18, 3);

BENCHMARK_MAIN();
