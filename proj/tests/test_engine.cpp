#include "gqw/engine.hpp"
#include "gqw/kernels.hpp"
#include "gqw/metrics.hpp"
#include "gqw/random.hpp"
#include "gqw/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace gqw;

namespace {

std::vector<cplx> random_state(unsigned n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> v(std::size_t{1} << n);
    double s = 0.0;
    for (auto& a : v) {
        a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        s += std::norm(a);
    }
    for (auto& a : v) a /= std::sqrt(s);
    return v;
}

SpectrumTable table_from(std::vector<double> energies) {
    SpectrumTable t;
    t.n_vars = static_cast<std::size_t>(std::countr_zero(energies.size()));
    t.energies = std::move(energies);
    t.valid.assign(t.energies.size(), 1);
    finalize_spectrum(t);
    return t;
}

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("serial and omp kernels agree") {
    const auto problem = generate_instance(ProblemKind::exact_cover, {10}, 1);
    const auto e_serial = kernels::serial::energies(problem);
    const auto e_omp = kernels::omp::energies(problem);
    REQUIRE(e_serial.size() == e_omp.size());
    for (std::size_t z = 0; z < e_serial.size(); ++z) {
        CHECK(e_serial[z] == doctest::Approx(problem.energy(z)).epsilon(1e-12));
        CHECK(e_omp[z] == doctest::Approx(problem.energy(z)).epsilon(1e-12));
    }

    auto a = random_state(10, 3);
    auto b = a;
    kernels::serial::cost_phase(a, e_serial, 0.37);
    kernels::omp::cost_phase(b, e_serial, 0.37);
    CHECK(a == b);
    kernels::serial::rotate_all(a, 10, 0.21);
    kernels::omp::rotate_all(b, 10, 0.21);
    CHECK(a == b);
    kernels::serial::rotate_qubit(a, 4, -0.7);
    kernels::omp::rotate_qubit(b, 4, -0.7);
    CHECK(a == b);
    std::vector<cplx> f(a.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, 0.01 * static_cast<double>(i));
    kernels::serial::multiply(a, f);
    kernels::omp::multiply(b, f);
    CHECK(a == b);
    CHECK(kernels::serial::norm2(a) == doctest::Approx(kernels::omp::norm2(b)).epsilon(1e-14));
    CHECK(kernels::serial::expectation(a, e_serial) ==
          doctest::Approx(kernels::omp::expectation(b, e_serial)).epsilon(1e-14));
}

TEST_CASE("deterministic reductions do not depend on the thread count") {
    auto v = random_state(14, 9);
    std::vector<double> e(v.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<double>(i % 97) * 1.37;
    const int saved = kernels::max_threads();
    kernels::set_threads(1);
    const double one = kernels::omp::expectation(v, e, true);
    const double n1 = kernels::omp::norm2(v, true);
    kernels::set_threads(4);
    CHECK(kernels::omp::expectation(v, e, true) == one);
    CHECK(kernels::omp::norm2(v, true) == n1);
    kernels::set_threads(saved);
}

TEST_CASE("equal superposition") {
    const auto one = equal_superposition(1);
    CHECK(one[0].real() == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(one[1].real() == doctest::Approx(1 / std::sqrt(2.0)));
    const auto two = equal_superposition(2);
    for (std::size_t i = 0; i < 4; ++i) CHECK(two[i] == cplx(0.5, 0.0));
    for (unsigned n : {1u, 5u, 12u, 16u}) CHECK(std::abs(equal_superposition(n).norm() - 1) <= 1e-12);
}

TEST_CASE("cost phase") {
    auto s = Statevector(2, random_state(2, 1));
    const auto before = s;
    const std::vector<double> e{0.0, 1.0, 2.0, 3.0};
    apply_cost_phase(s, e, 0.0);
    CHECK(max_diff(s.amplitudes(), before.amplitudes()) == 0.0);

    auto b = Statevector::basis(2, 2);
    apply_cost_phase(b, e, 0.5);
    CHECK(std::norm(b[2]) == doctest::Approx(1.0));
    CHECK(std::arg(b[2]) == doctest::Approx(-1.0));

    // Two equally weighted levels a distance dE apart pick up a relative phase of pi.
    auto u = equal_superposition(1);
    const std::vector<double> lv{0.3, 2.3};
    const double tau = std::numbers::pi / 2.0;
    apply_cost_phase(u, lv, tau);
    const auto m = oracle::expm_2x2(0.3, 0.0, 2.3, tau);
    const auto ref = oracle::apply(m, {cplx(1 / std::sqrt(2.0)), cplx(1 / std::sqrt(2.0))});
    CHECK(std::abs(u[0] - ref[0]) <= 1e-14);
    CHECK(std::abs(u[1] - ref[1]) <= 1e-14);
    CHECK(std::abs(u[1] / u[0] + 1.0) <= 1e-12);

    auto wrong = Statevector(3);
    CHECK_THROWS(apply_cost_phase(wrong, e, 1.0));
}

TEST_CASE("driver rotation") {
    auto s = Statevector(3, random_state(3, 2));
    const auto before = s;
    apply_driver_rotation(s, 0.0);
    CHECK(max_diff(s.amplitudes(), before.amplitudes()) == 0.0);

    for (unsigned n : {1u, 2u, 3u, 4u}) {
        auto z = Statevector(n);
        apply_driver_rotation(z, std::numbers::pi / 2);
        const cplx expect = std::pow(cplx(0, 1), static_cast<int>(n));
        CHECK(std::abs(z[z.dim() - 1] - expect) <= 1e-14);
    }

    auto plus = equal_superposition(4);
    apply_driver_rotation(plus, 0.3);
    const cplx phase = std::exp(cplx(0, 4 * 0.3));
    for (std::size_t i = 0; i < plus.dim(); ++i) CHECK(std::abs(plus[i] - 0.25 * phase) <= 1e-14);

    // Qubit order only reassociates floating point.
    auto fwd = random_state(8, 5);
    auto rev = fwd;
    for (unsigned q = 0; q < 8; ++q) kernels::serial::rotate_qubit(fwd, q, 0.77);
    for (unsigned q = 8; q-- > 0;) kernels::serial::rotate_qubit(rev, q, 0.77);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(std::abs(std::norm(fwd[i]) - std::norm(rev[i])) <= 1e-12);
    }

    // One qubit against the closed-form exponential of -theta * (-X).
    auto one = Statevector(1, {cplx(0.6), cplx(0, 0.8)});
    apply_driver_rotation(one, 0.4);
    const auto ref = oracle::apply(oracle::expm_2x2(0, -1, 0, 0.4), {cplx(0.6), cplx(0, 0.8)});
    CHECK(std::abs(one[0] - ref[0]) <= 1e-14);
    CHECK(std::abs(one[1] - ref[1]) <= 1e-14);
}

TEST_CASE("trotter step") {
    const std::vector<double> e{0, 3, 1, 7};
    SUBCASE("zero hopping keeps probabilities") {
        auto s = Statevector(2, random_state(2, 4));
        const auto p0 = s.probabilities();
        const auto sched = constant_schedule(0.0, 1.0);
        for (int k = 0; k < 10; ++k) trotter_step(s, e, sched, 0.1 * k, 0.1);
        const auto p1 = s.probabilities();
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p0[i] - p1[i]) <= 1e-14);
    }
    SUBCASE("constant energies leave |+> in place") {
        auto s = equal_superposition(2);
        const std::vector<double> c(4, 2.5);
        trotter_step(s, c, constant_schedule(1.3, 1.0), 0.0, 0.5);
        const cplx g = s[0] / std::abs(s[0]);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s[i] - 0.5 * g) <= 1e-14);
    }
    SUBCASE("one qubit converges to the exact exponential at second order") {
        const double gamma = 0.8;
        const double t_end = 1.0;
        const std::vector<double> lv{0.0, 2.0};
        const auto exact = oracle::apply(oracle::expm_2x2(0.0, -gamma, 2.0, t_end),
                                         {cplx(1 / std::sqrt(2.0)), cplx(1 / std::sqrt(2.0))});
        auto err = [&](std::size_t steps) {
            auto s = equal_superposition(1);
            const auto sched = constant_schedule(gamma, t_end);
            const double dt = t_end / static_cast<double>(steps);
            for (std::size_t k = 0; k < steps; ++k) trotter_step(s, lv, sched, dt * static_cast<double>(k), dt);
            return std::max(std::abs(s[0] - exact[0]), std::abs(s[1] - exact[1]));
        };
        const double e1 = err(100);
        const double e2 = err(200);
        CHECK(e1 < 1e-4);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("evolve") {
    SUBCASE("T = 0 returns the uniform state") {
        const auto s = enumerate_spectrum(rescale(generate_instance(ProblemKind::exact_cover, {8}, 1)));
        EvolutionConfig cfg;
        cfg.total_time = 0.0;
        const auto r = evolve(s, linear_qa_schedule(1.0), cfg);
        CHECK(r.record.steps == 0);
        const auto plus = equal_superposition(8);
        CHECK(max_diff(r.state.amplitudes(), plus.amplitudes()) == 0.0);
        const auto probs = r.state.probabilities();
        CHECK(r.record.s_q == doctest::Approx(solution_quality(probs, s)));
    }
    SUBCASE("two-level problem follows the Rabi closed form") {
        for (auto [gamma, delta] : {std::pair{1.0, 1.0}, std::pair{0.3, 1.7}, std::pair{2.0, 0.5}}) {
            const auto s = table_from({-delta, delta});
            EvolutionConfig cfg;
            cfg.total_time = 10.0;
            cfg.dt = 1e-4;
            cfg.record = true;
            cfg.record_stride = 250;
            const auto r = evolve(s, constant_schedule(gamma, 10.0), cfg);
            double worst = 0.0;
            for (const auto& smp : r.record.trace) {
                worst = std::max(worst, std::abs(smp.p_gs - rabi_probability(gamma, delta, smp.t)));
            }
            CHECK(worst <= 1e-6);
            CHECK(r.record.norm_error <= 1e-9);
        }
    }
    SUBCASE("search problem oscillates with a first maximum above one half") {
        const unsigned n = 12;
        const auto s = search_spectrum(n, 1234);
        const double g = search_optimal_gamma(n);
        EvolutionConfig cfg;
        cfg.total_time = 250.0;
        cfg.dt = 1e-2;
        cfg.record = true;
        cfg.record_stride = 50;
        const auto r = evolve(s, constant_schedule(g, cfg.total_time), cfg);
        std::vector<double> p;
        for (const auto& smp : r.record.trace) p.push_back(smp.p_gs);
        const auto i = oracle::first_peak(p, 40);
        REQUIRE(i < p.size());
        CHECK(p[i] > 0.5);
        // Periodic: the probability falls back well below the peak afterwards.
        CHECK(*std::min_element(p.begin() + static_cast<long>(i), p.end()) < 0.5 * p[i]);
        CHECK(r.record.norm_error <= 1e-9);
    }
    SUBCASE("step count") {
        CHECK(step_count(12.0, 1e-3) == 12000);
        CHECK(step_count(1.0, 0.3) == 4);
        CHECK(step_count(0.0, 1e-3) == 0);
        CHECK_THROWS(step_count(1.0, 0.0));
    }
    SUBCASE("recorded trace spans the run") {
        const auto s = enumerate_spectrum(rescale(generate_instance(ProblemKind::exact_cover, {6}, 2)));
        EvolutionConfig cfg;
        cfg.total_time = 1.0;
        cfg.dt = 1e-2;
        cfg.record = true;
        cfg.record_stride = 7;
        const auto r = evolve(s, linear_qa_schedule(1.0), cfg);
        CHECK(r.record.trace.front().t == 0.0);
        CHECK(r.record.trace.back().t == 1.0);
        CHECK(r.record.trace.size() == 1 + 100 / 7 + 1);
        for (const auto& smp : r.record.trace) {
            double sum = 0.0;
            for (double b : smp.bins) sum += b;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(r.record.trace.back().energy == doctest::Approx(r.record.e_psi).epsilon(1e-12));
    }
}

TEST_CASE("energy expectation and level probabilities") {
    const auto basis = Statevector::basis(2, 3);
    const std::vector<double> e{5, 1, 2, 9};
    CHECK(energy_expectation(basis, e) == 9.0);

    const auto u = equal_superposition(1);
    CHECK(energy_expectation(u, std::vector<double>{0, 100}) == doctest::Approx(50.0));

    const auto r = random_state(8, 17);
    std::vector<double> en(256);
    Rng rng(2);
    for (auto& x : en) x = rng.uniform(0, 100);
    double direct = 0.0;
    for (std::size_t z = 0; z < 256; ++z) direct += std::norm(r[z]) * en[z];
    CHECK(energy_expectation(Statevector(8, r), en) == doctest::Approx(direct).epsilon(1e-13));

    const auto t4 = table_from({0, 1, 2, 3});
    auto hb = level_probabilities(Statevector::basis(2, 2), t4, 4);
    CHECK(std::count_if(hb.begin(), hb.end(), [](double v) { return v > 0; }) == 1);
    CHECK(level_probabilities(equal_superposition(2), t4, 1) == std::vector<double>{1.0});
    const auto h2 = level_probabilities(equal_superposition(2), t4, 2);
    CHECK(h2[0] == doctest::Approx(0.5));
    CHECK(h2[1] == doctest::Approx(0.5));
}

TEST_CASE("instantaneous spectrum") {
    const auto s = enumerate_spectrum(rescale(generate_instance(ProblemKind::exact_cover, {8}, 3)));
    auto distinct = s.energies;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
                   distinct.end());
    const auto at0 = instantaneous_spectrum(s.energies, 0.0, 4);
    REQUIRE(at0.eigenvalues.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(at0.eigenvalues[i] == doctest::Approx(distinct[i]));

    const auto two = instantaneous_spectrum(std::vector<double>{0, 2}, 1.0, 2);
    CHECK(two.eigenvalues[0] == doctest::Approx(1 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK(two.eigenvalues[1] == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-12));

    // Dense and Lanczos agree on the low end.
    const auto d = instantaneous_spectrum(s.energies, 3.0, 3, true, EigenMethod::dense);
    const auto l = instantaneous_spectrum(s.energies, 3.0, 3, true, EigenMethod::lanczos);
    for (std::size_t i = 0; i < 3; ++i) CHECK(l.eigenvalues[i] == doctest::Approx(d.eigenvalues[i]).epsilon(1e-9));
    double overlap = 0.0;
    for (std::size_t z = 0; z < s.energies.size(); ++z) overlap += d.eigenvectors[0][z] * l.eigenvectors[0][z];
    CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-8));

    CHECK_THROWS(instantaneous_spectrum(std::vector<double>(std::size_t{1} << 21, 0.0), 1.0, 2));
}

TEST_CASE("state dump round trip") {
    const auto path = std::filesystem::temp_directory_path() / "gqw_state_dump_test.bin";
    const Statevector s(5, random_state(5, 8));
    write_state_dump(s, path);
    const auto back = read_state_dump(path);
    CHECK(back.n_qubits() == 5);
    CHECK(max_diff(back.amplitudes(), s.amplitudes()) == 0.0);
    std::filesystem::remove(path);
}
