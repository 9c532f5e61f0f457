#include "gqw/engine.hpp"
#include "gqw/metrics.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>

using namespace gqw;

namespace {

SpectrumTable table_from(std::vector<double> energies, std::vector<std::uint8_t> valid) {
    SpectrumTable t;
    t.n_vars = static_cast<std::size_t>(std::countr_zero(energies.size()));
    t.energies = std::move(energies);
    t.valid = std::move(valid);
    finalize_spectrum(t);
    return t;
}

}  // namespace

TEST_CASE("solution quality") {
    const auto s = table_from({0, 50, 100, 70}, {1, 1, 1, 0});
    CHECK(solution_quality(Statevector::basis(2, 0), s) == 1.0);
    CHECK(solution_quality(Statevector::basis(2, 2), s) == 0.0);
    CHECK(solution_quality(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, s) ==
          doctest::Approx(0.5).epsilon(1e-15));

    // Invalid mass never counts, however it is spread.
    const auto t8 = table_from({0, 40, 100, 70, 80, 90, 60, 100}, {1, 1, 1, 0, 0, 0, 1, 0});
    const std::vector<double> q1{0.2, 0.3, 0.1, 0.1, 0.1, 0.05, 0.1, 0.05};
    const std::vector<double> q2{0.2, 0.3, 0.1, 0.0, 0.2, 0.0, 0.1, 0.1};
    CHECK(solution_quality(q1, t8) == solution_quality(q2, t8));

    // Exact cover: the only valid energy is zero, so S_q is the ground-state probability.
    const auto ec = enumerate_spectrum(rescale(generate_instance(ProblemKind::exact_cover, {8}, 2)));
    std::vector<double> probs(ec.energies.size());
    for (std::size_t z = 0; z < probs.size(); ++z) probs[z] = 1.0 + static_cast<double>(z % 7);
    double sum = 0.0;
    for (double v : probs) sum += v;
    for (auto& v : probs) v /= sum;
    CHECK(solution_quality(probs, ec) == ground_state_probability(probs, ec));

    // A single valid level scores every valid state as optimal.
    const auto degenerate = table_from({5, 5, 9, 8}, {1, 1, 0, 0});
    CHECK(solution_quality(std::vector<double>{0.3, 0.2, 0.4, 0.1}, degenerate) == doctest::Approx(0.5));
}

TEST_CASE("approximation ratio") {
    const auto s = table_from({0, 50, 100, 70}, {1, 1, 1, 1});
    CHECK(approximation_ratio(Statevector::basis(2, 0), s) == 0.0);
    CHECK(approximation_ratio(Statevector::basis(2, 2), s) == 1.0);
    CHECK(approximation_ratio(std::vector<double>{0.5, 0, 0.5, 0}, s) == 0.5);
    CHECK_THROWS_AS(approximation_ratio(std::vector<double>{0.5, 0.5}, table_from({3, 3}, {1, 1})),
                    MetricError);
}

TEST_CASE("time to solution") {
    for (double n_opt : {0.0, 7.0, 50.0}) {
        CHECK(time_to_solution(kDefaultTargetProbability, 2.5, n_opt) == (1 + n_opt) * 2.5);
    }
    CHECK(time_to_solution(1.0 - 1e-15, 2.0, 10) == doctest::Approx(22.0));
    CHECK(time_to_solution(1.0, 2.0, 10) == 22.0);
    CHECK(time_to_solution(0.5, 1.0, 0) == doctest::Approx(std::log(1e-4) / std::log(0.5)));
    CHECK(time_to_solution(0.5, 1.0, 0) == doctest::Approx(13.2877).epsilon(1e-5));
    double prev = 1e300;
    for (int k = 1; k < 100; ++k) {
        const double v = time_to_solution(k / 100.0, 3.0, 5);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK_THROWS_WITH_AS(time_to_solution(0.0, 1.0, 0), doctest::Contains("unreachable target"),
                         MetricError);
}

TEST_CASE("geometric aggregate") {
    const std::vector<double> same{0.3, 0.3, 0.3};
    const auto g = geometric_aggregate(same);
    CHECK(g.mean == doctest::Approx(0.3));
    CHECK(g.stddev == doctest::Approx(1.0));

    const auto h = geometric_aggregate(std::vector<double>{1.0, 100.0});
    CHECK(h.mean == doctest::Approx(10.0));
    CHECK(h.stddev == doctest::Approx(10.0));

    const auto z = geometric_aggregate(std::vector<double>{0.0, 1.0});
    CHECK(z.floored == 1);
    CHECK(z.mean == doctest::Approx(1e-6));

    const std::vector<double> v{0.2, 0.5, 0.9, 0.01};
    std::vector<double> scaled;
    for (double x : v) scaled.push_back(3.0 * x);
    const auto a = geometric_aggregate(v);
    const auto b = geometric_aggregate(scaled);
    CHECK(b.mean == doctest::Approx(3.0 * a.mean));
    CHECK(b.stddev == doctest::Approx(a.stddev));
}

TEST_CASE("scaling fits") {
    std::vector<ScalingPoint> lin, ex;
    for (double n : {8.0, 10.0, 12.0, 15.0}) {
        lin.push_back({n, 2.0 + 3.0 * n});
        ex.push_back({n, 0.5 * std::exp2(0.2 * n)});
    }
    const auto fl = fit_scaling(lin, ScalingModel::linear);
    CHECK(std::abs(fl.a - 2.0) < 1e-9);
    CHECK(std::abs(fl.b - 3.0) < 1e-9);
    CHECK(fl.residual < 1e-9);
    const auto fe = fit_scaling(ex, ScalingModel::exponential);
    CHECK(std::abs(fe.a - 0.5) < 1e-9);
    CHECK(std::abs(fe.b - 0.2) < 1e-9);
    CHECK(fe.predict(20.0) == doctest::Approx(8.0));

    CHECK_THROWS_AS(fit_scaling(std::vector<ScalingPoint>{{1, 1}, {2, 2}}, ScalingModel::linear),
                    MetricError);
    CHECK_THROWS_AS(fit_scaling(std::vector<ScalingPoint>{{1, 1}, {2, 0}, {3, 2}}, ScalingModel::exponential),
                    MetricError);
}

TEST_CASE("threshold crossing") {
    const std::vector<double> t{1, 2, 3, 4};
    const std::vector<double> v{0.0, 0.2, 0.6, 0.9};
    CHECK(*threshold_crossing(t, v, 0.4) == doctest::Approx(2.5));
    CHECK(*threshold_crossing(t, v, 0.0) == 1.0);
    CHECK_FALSE(threshold_crossing(t, v, 0.95).has_value());
}

TEST_CASE("rescaled optima have exactly zero energy and full quality") {
    for (auto kind : {ProblemKind::tsp, ProblemKind::garden}) {
        const SizeParams size = kind == ProblemKind::tsp ? SizeParams{0, 4} : SizeParams{12, 0, 3};
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto s = enumerate_spectrum(rescale(generate_instance(kind, size, seed)));
            CHECK(s.e_min == 0.0);
            for (auto g : s.ground_states) {
                CHECK(s.energies[g] == 0.0);
                CHECK(solution_quality(Statevector::basis(static_cast<unsigned>(s.n_vars), g), s) == 1.0);
            }
        }
    }
}
