#include "gqw/random.hpp"
#include "gqw/schedules.hpp"
#include "gqw/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gqw;

namespace {

GapProfile polynomial_profile(std::vector<double> coefficients, double e_min, double e_max) {
    GapProfile p;
    p.e_min = e_min;
    p.e_max = e_max;
    p.fit.degree = coefficients.size() - 1;
    p.fit.e_min = e_min;
    p.fit.e_max = e_max;
    p.fit.coefficients = std::move(coefficients);
    return p;
}

}  // namespace

TEST_CASE("bezier evaluation") {
    CHECK(bezier_eval(0.3, 0.7, 0.6, 0.2, 0.0) == 1.0);
    CHECK(bezier_eval(0.3, 0.7, 0.6, 0.2, 1.0) == 0.0);
    CHECK(bezier_eval(0.5, 0.5, 0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));

    const double ref = oracle::bezier_grid(0.25, 0.9, 0.75, 0.1, 0.5);
    CHECK(std::abs(bezier_eval(0.25, 0.9, 0.75, 0.1, 0.5) - ref) <= 1e-6);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const double x1 = rng.uniform01(), y1 = rng.uniform01();
        const double x2 = rng.uniform01(), y2 = rng.uniform01();
        const BezierCurve c(x1, y1, x2, y2);
        for (int k = 0; k <= 50; ++k) {
            const double tau = k / 50.0;
            REQUIRE(std::abs(c(c.x_at(tau)) - c.y_at(tau)) <= 1e-8);
        }
        for (double u : {0.1, 0.37, 0.8}) {
            // Only the abscissae are put in order; the ordinates keep their slots.
            const double ref = oracle::bezier_grid(std::min(x1, x2), y1, std::max(x1, x2), y2, u, 200'000);
            CHECK(std::abs(c(u) - ref) <= 1e-5);
        }
    }
    CHECK_THROWS_AS(BezierCurve(1.5, 0.5, 0.5, 0.5), ScheduleError);
}

TEST_CASE("gqw schedule") {
    SUBCASE("boundaries are exact") {
        const auto s = gqw_schedule({0.3, 0.8, 0.6, 0.4, 1.0, 0.0}, 5.0);
        CHECK(s.gamma(0.0) == 100.0);
        CHECK(s.gamma(5.0) == 1e-3);
    }
    SUBCASE("symmetric controls give the log midpoint") {
        const auto s = gqw_schedule({0.5, 0.5, 0.5, 0.5, 1.0, 0.0}, 2.0);
        CHECK(s.gamma(1.0) == doctest::Approx(std::sqrt(100 * 0.001)).epsilon(1e-10));
    }
    SUBCASE("equal boundary rates give a constant") {
        // Gamma_start = 10^0 = 1, Gamma_end = 10^0 = 1.
        const auto s = gqw_schedule({0.2, 0.9, 0.7, 0.1, 0.0, 1.0}, 3.0);
        for (int k = 0; k <= 30; ++k) CHECK(s.gamma(0.1 * k) == 1.0);
    }
    SUBCASE("monotone for random controls") {
        Rng rng(8);
        for (int trial = 0; trial < 50; ++trial) {
            HyperParams hp{rng.uniform01(), rng.uniform01(), rng.uniform01(),
                           rng.uniform01(), rng.uniform01(), rng.uniform01()};
            const auto s = gqw_schedule(hp, 7.0);
            double prev = s.gamma(0.0);
            for (int k = 1; k <= 1000; ++k) {
                const double g = s.gamma(7.0 * k / 1000.0);
                REQUIRE(g <= prev);
                prev = g;
            }
        }
    }
    SUBCASE("rejects inverted boundaries") {
        BoundaryRanges r{-1.0, -1.0, 0.5, 0.5};
        CHECK_THROWS_AS(gqw_schedule({0.5, 0.5, 0.5, 0.5, 0.0, 0.0}, 1.0, r), ScheduleError);
        CHECK_THROWS_AS(gqw_schedule({0.5, 0.5, 0.5, 0.5, 1.0, 0.0}, 0.0), ScheduleError);
    }
}

TEST_CASE("linear annealing") {
    const auto s = linear_qa_schedule(8.0);
    CHECK(s.gamma(4.0) == 1.0);
    CHECK(s.gamma(8.0) == 0.0);
    CHECK(s.gamma(2.0) == 3.0);
    CHECK(s.gamma(0.0) == 1e4);
    for (int k = 1; k < 100; ++k) {
        const double u = k / 100.0;
        CHECK(s.gamma(8.0 * u) * u == doctest::Approx(1 - u).epsilon(1e-14));
    }
}

TEST_CASE("constant schedule") {
    const auto s = constant_schedule(0.7, 3.0);
    for (double t : {0.0, 1.0, 2.9, 3.0}) CHECK(s.gamma(t) == 0.7);
    CHECK(search_optimal_gamma(2) == 0.3125);
    // N = 3: (3/2 + 3/4 + 1/6) / 8.
    CHECK(search_optimal_gamma(3) == doctest::Approx((1.5 + 0.75 + 1.0 / 6.0) / 8.0).epsilon(1e-15));
}

TEST_CASE("spectral oracle schedule") {
    SUBCASE("constant gap") {
        const auto s = spectral_oracle_schedule(polynomial_profile({8.0}, 0.0, 100.0), 4.0);
        for (int k = 0; k <= 40; ++k) {
            const double t = 0.1 * k;
            CHECK(s.progress(t) == doctest::Approx(t / 4.0).epsilon(1e-12));
            CHECK(s.gamma(t) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    SUBCASE("endpoints") {
        const auto s = spectral_oracle_schedule(polynomial_profile({1.0, 3.0, -2.0, 0.5}, -5.0, 20.0), 2.0);
        CHECK(s.progress(0.0) == 0.0);
        CHECK(s.progress(2.0) == 1.0);
        double prev = -1.0;
        for (int k = 0; k <= 200; ++k) {
            const double p = s.progress(2.0 * k / 200.0);
            CHECK(p > prev);
            prev = p;
        }
    }
    SUBCASE("linear gap against quadrature") {
        const auto s = spectral_oracle_schedule(polynomial_profile({0.0, 100.0}, 0.0, 100.0), 1.0);
        const double total = oracle::trapezoid([](double e) { return e; }, 0.0, 100.0);
        for (double u : {0.1, 0.25, 0.5, 0.8, 0.95}) {
            const double e_lin = 100.0 * (1.0 - u);
            const double part = oracle::trapezoid([](double e) { return e; }, e_lin, 100.0);
            CHECK(std::abs(s.progress(u) - part / total) <= 1e-6);
        }
    }
    SUBCASE("hopping rate follows a quarter of the gap and never rises in time") {
        const auto s = spectral_oracle_schedule(polynomial_profile({1.0, 10.0}, 0.0, 50.0), 3.0);
        CHECK(s.gamma(0.0) == doctest::Approx(11.0 / 4.0).epsilon(1e-9));
        CHECK(s.gamma(3.0) == doctest::Approx(1.0 / 4.0).epsilon(1e-9));
        double prev = s.gamma(0.0);
        for (int k = 1; k <= 300; ++k) {
            const double g = s.gamma(0.01 * k);
            CHECK(g <= prev);
            prev = g;
        }
    }
}

TEST_CASE("schedule json round trip") {
    const std::vector<Schedule> all{
        constant_schedule(0.25, 2.0), linear_qa_schedule(3.0),
        gqw_schedule({0.2, 0.9, 0.7, 0.1, 0.6, 0.3}, 4.0),
        spectral_oracle_schedule(polynomial_profile({1.0, 2.0, 0.5}, 0.0, 100.0), 5.0, 65)};
    for (const auto& s : all) {
        const auto back = Schedule::from_json(nlohmann::json::parse(s.to_json().dump()));
        CHECK(back.variant_name() == s.variant_name());
        CHECK(back.total_time() == s.total_time());
        for (int k = 0; k <= 20; ++k) {
            const double t = s.total_time() * k / 20.0;
            CHECK(back.gamma(t) == s.gamma(t));
        }
    }
    CHECK_THROWS_AS(Schedule::from_json({{"variant", "warp"}, {"T", 1.0}}), ScheduleError);
}
