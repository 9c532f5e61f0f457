#include "gqw/problems.hpp"
#include "gqw/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace gqw;

namespace {

std::vector<double> energies_of(const QuboProblem& p) {
    std::vector<double> e(std::size_t{1} << p.n_vars());
    for (std::size_t z = 0; z < e.size(); ++z) e[z] = p.energy(z);
    return e;
}

Matrix<int> random_subsets(std::size_t n, std::size_t elements, Rng& rng) {
    Matrix<int> a(n, elements, 0);
    for (auto& v : a.data) v = rng.uniform01() < 0.4 ? 1 : 0;
    return a;
}

}  // namespace

TEST_CASE("exact cover small cases") {
    // Incidence is N x P with rows as subsets.
    auto two = build_exact_cover(Matrix<int>{{1}, {1}});
    CHECK(energies_of(two) == std::vector<double>{1, 0, 0, 1});

    auto one = build_exact_cover(Matrix<int>{{1, 1}});
    CHECK(one.energy(0) == 2.0);
    CHECK(one.energy(1) == 0.0);

    auto ident = build_exact_cover(Matrix<int>{{1, 0}, {0, 1}});
    CHECK(ident.energy(0b11) == 0.0);
    CHECK(ident.energy(0b00) == 2.0);
    CHECK(ident.energy(0b01) == 1.0);
    CHECK(ident.energy(0b10) == 1.0);
}

TEST_CASE("exact cover matches the direct cost for random incidence matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 4 + rng.uniform_index(9);
        const std::size_t elements = 2 + rng.uniform_index(6);
        const auto a = random_subsets(n, elements, rng);
        const auto p = build_exact_cover(a);
        const auto s = enumerate_spectrum(p);
        for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z) {
            const double direct = oracle::exact_cover_cost(a, z);
            REQUIRE(s.energies[z] == direct);
            REQUIRE(static_cast<bool>(s.valid[z]) == (direct == 0.0));
        }
    }
}

TEST_CASE("tsp reduces to (M-1)^2 variables with (M-1)! valid tours") {
    for (std::size_t m : {3u, 4u}) {
        Rng rng(m);
        for (int trial = 0; trial < 10; ++trial) {
            Matrix<double> c(m, m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (i != j) c(i, j) = static_cast<double>(1 + rng.uniform_index(10));
                }
            }
            const double lambda = default_tsp_lambda(c);
            const auto p = build_tsp(c, lambda);
            REQUIRE(p.n_vars() == (m - 1) * (m - 1));
            const auto s = enumerate_spectrum(p);
            std::size_t valid = 0;
            for (std::uint64_t z = 0; z < s.energies.size(); ++z) {
                REQUIRE(s.energies[z] == oracle::tsp_cost(c, lambda, z));
                REQUIRE(static_cast<bool>(s.valid[z]) == oracle::tsp_valid(m, z));
                valid += s.valid[z];
            }
            CHECK(valid == (m == 3 ? 2u : 6u));
            CHECK(s.valid_count == valid);
            // Every valid tour beats every invalid string.
            double worst_valid = -1e300;
            double best_invalid = 1e300;
            for (std::size_t z = 0; z < s.energies.size(); ++z) {
                if (s.valid[z]) worst_valid = std::max(worst_valid, s.energies[z]);
                else best_invalid = std::min(best_invalid, s.energies[z]);
            }
            CHECK(worst_valid < best_invalid);
        }
    }
}

TEST_CASE("tsp examples") {
    SUBCASE("uniform costs give two degenerate ground tours") {
        Matrix<double> c{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
        const auto s = enumerate_spectrum(build_tsp(c, 1.0));
        CHECK(s.valid_count == 2);
        std::vector<double> tours;
        for (std::size_t z = 0; z < s.energies.size(); ++z) {
            if (s.valid[z]) tours.push_back(s.energies[z]);
        }
        REQUIRE(tours.size() == 2);
        CHECK(tours[0] == tours[1]);
        CHECK(tours[0] == s.e_min);
        CHECK(s.e_max_valid == s.e_min);
    }
    SUBCASE("asymmetric costs single out one orientation") {
        Matrix<double> c{{0, 1, 5}, {5, 0, 1}, {1, 5, 0}};
        const auto s = enumerate_spectrum(build_tsp(c, 0.1));
        REQUIRE(s.ground_states.size() == 1);
        const auto g = s.ground_states[0];
        // 0 -> 1 -> 2 -> 0: city 1 at step 1, city 2 at step 2.
        CHECK(g == 0b1001);
    }
    SUBCASE("zero costs leave both tours at energy zero") {
        const auto s = enumerate_spectrum(build_tsp(Matrix<double>(3, 3, 0.0), 1.0));
        CHECK(s.e_min == 0.0);
        CHECK(s.ground_states.size() == 2);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_tsp(Matrix<double>(2, 2, 1.0), 1.0), ProblemError);
        CHECK_THROWS_AS(build_tsp(Matrix<double>(3, 4, 1.0), 1.0), ProblemError);
    }
}

TEST_CASE("garden matches the direct cost") {
    Rng rng(5);
    int built = 0;
    while (built < 10) {
        const std::size_t pots = 2 + rng.uniform_index(3);
        const std::size_t species = 2 + rng.uniform_index(2);
        if (pots * species > 12) continue;
        Matrix<int> adj(pots, pots, 0);
        for (std::size_t k = 0; k < pots; ++k) {
            for (std::size_t l = k + 1; l < pots; ++l) {
                adj(k, l) = adj(l, k) = rng.uniform01() < 0.6 ? 1 : 0;
            }
        }
        Matrix<int> a(species, species, 0);
        for (std::size_t j = 0; j < species; ++j) {
            for (std::size_t l = j; l < species; ++l) {
                a(j, l) = a(l, j) = static_cast<int>(rng.uniform_index(3)) - 1;
            }
        }
        std::vector<int> counts(species, 0);
        for (std::size_t k = 0; k < pots; ++k) ++counts[rng.uniform_index(species)];
        const double lambda = default_garden_lambda(a);
        const auto p = build_garden(adj, a, counts, lambda, lambda);
        const auto s = enumerate_spectrum(p);
        for (std::uint64_t z = 0; z < s.energies.size(); ++z) {
            REQUIRE(s.energies[z] == oracle::garden_cost(adj, a, counts, lambda, lambda, z));
            REQUIRE(static_cast<bool>(s.valid[z]) == oracle::garden_valid(pots, counts, z));
        }
        ++built;
    }
}

TEST_CASE("garden examples") {
    Matrix<int> adj{{0, 1}, {1, 0}};
    SUBCASE("no companions leaves valid states degenerate") {
        const auto s = enumerate_spectrum(build_garden(adj, Matrix<int>(2, 2, 0), {1, 1}, 2, 2));
        for (std::size_t z = 0; z < s.energies.size(); ++z) {
            if (s.valid[z]) CHECK(s.energies[z] == 2.0);
        }
    }
    SUBCASE("antagonists end up in different pots") {
        Matrix<int> a{{0, -1}, {-1, 0}};
        const auto s = enumerate_spectrum(build_garden(adj, a, {1, 1}, 3, 3));
        std::set<std::uint64_t> ground(s.ground_states.begin(), s.ground_states.end());
        CHECK(ground == std::set<std::uint64_t>{0b1001, 0b0110});
    }
    SUBCASE("counts (2, 0) only admit species 0 twice") {
        const auto s = enumerate_spectrum(build_garden(adj, Matrix<int>(2, 2, 0), {2, 0}, 2, 2));
        CHECK(s.valid_count == 1);
        CHECK(s.valid[0b0101]);
    }
    CHECK_THROWS_AS(build_garden(adj, Matrix<int>(2, 2, 0), {1, 2}, 1, 1), ProblemError);
}

TEST_CASE("ising form") {
    SUBCASE("zero matrix keeps the offset") {
        QuboProblem p(3, ProblemKind::custom);
        p.offset = 2.5;
        const auto f = ising_from_qubo(p);
        CHECK(std::all_of(f.h.begin(), f.h.end(), [](double h) { return h == 0.0; }));
        CHECK(f.offset == 2.5);
    }
    SUBCASE("single linear term") {
        QuboProblem p(1, ProblemKind::custom);
        p.set(0, 0, 1.0);
        const auto f = ising_from_qubo(p);
        CHECK(f.h[0] == 0.5);
        CHECK(f.offset == 0.5);
        CHECK(f.energy(0) == 0.0);
        CHECK(f.energy(1) == 1.0);
    }
    SUBCASE("single coupling") {
        QuboProblem p(2, ProblemKind::custom);
        p.set(0, 1, 4.0);
        const auto f = ising_from_qubo(p);
        CHECK(f.J(0, 1) == 1.0);
        CHECK(f.h[0] == 1.0);
        CHECK(f.h[1] == 1.0);
        CHECK(f.offset == 1.0);
    }
    SUBCASE("equivalence on generated instances") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto p = generate_instance(ProblemKind::exact_cover, {12}, seed);
            const auto f = ising_from_qubo(p);
            for (std::uint64_t z = 0; z < (1u << 12); ++z) REQUIRE(f.energy(z) == p.energy(z));
        }
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto p = generate_instance(ProblemKind::tsp, {0, 4}, seed);
            const auto f = ising_from_qubo(p);
            for (std::uint64_t z = 0; z < (1u << 9); ++z) REQUIRE(f.energy(z) == p.energy(z));
        }
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto p = generate_instance(ProblemKind::garden, {12, 0, 3}, seed);
            const auto f = ising_from_qubo(p);
            for (std::uint64_t z = 0; z < (1u << 12); ++z) REQUIRE(f.energy(z) == p.energy(z));
        }
    }
}

TEST_CASE("rescale") {
    QuboProblem p(1, ProblemKind::custom);
    p.offset = 1.0;
    p.set(0, 0, 2.0);
    const auto r = rescale(p);
    CHECK(r.energy(0) == 0.0);
    CHECK(r.energy(1) == 100.0);

    const auto ec = rescale(build_exact_cover(Matrix<int>{{1}, {1}}));
    CHECK(energies_of(ec) == std::vector<double>{100, 0, 0, 100});

    const auto inst = generate_instance(ProblemKind::exact_cover, {10}, 4);
    const auto once = rescale(inst);
    const auto twice = rescale(once);
    const auto e_orig = energies_of(inst);
    const auto e1 = energies_of(once);
    const auto e2 = energies_of(twice);
    for (std::size_t z = 0; z < e1.size(); ++z) {
        CHECK(std::abs(e1[z] - e2[z]) <= 1e-12);
        CHECK(std::abs(once.scale_record.factor * e_orig[z] + once.scale_record.shift - e1[z]) <= 1e-9);
    }
    // Order is preserved.
    for (std::size_t z = 1; z < e1.size(); ++z) {
        CHECK((e_orig[z] < e_orig[z - 1]) == (e1[z] < e1[z - 1]));
    }

    QuboProblem flat(2, ProblemKind::custom);
    CHECK_THROWS_WITH_AS(rescale(flat), doctest::Contains("flat spectrum"), ProblemError);
}

TEST_CASE("enumeration") {
    const auto s = enumerate_spectrum(build_exact_cover(Matrix<int>{{1}, {1}}));
    CHECK(s.ground_states == std::vector<std::uint64_t>{1, 2});
    CHECK(s.e_min == 0.0);

    const auto flat = enumerate_spectrum(QuboProblem(3, ProblemKind::custom));
    CHECK(flat.flat);
    CHECK(flat.ground_states.size() == 8);

    CHECK_THROWS_WITH_AS(enumerate_spectrum(QuboProblem(30, ProblemKind::custom), 26),
                         doctest::Contains("streaming"), ProblemError);
}

TEST_CASE("search spectrum") {
    const auto s = search_spectrum(4, 5);
    CHECK(s.energies[5] == -1.0);
    CHECK(s.ground_states == std::vector<std::uint64_t>{5});
    CHECK(s.constraint_only);
}

TEST_CASE("generators") {
    const auto a = generate_instance(ProblemKind::exact_cover, {12}, 7);
    const auto b = generate_instance(ProblemKind::exact_cover, {12}, 7);
    CHECK(std::equal(a.dense_coeffs().begin(), a.dense_coeffs().end(), b.dense_coeffs().begin(),
                     b.dense_coeffs().end()));
    CHECK(a.offset == b.offset);

    CHECK(generate_instance(ProblemKind::tsp, {0, 4}, 1).n_vars() == 9);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = enumerate_spectrum(generate_instance(ProblemKind::exact_cover, {12}, seed));
        CHECK(s.ground_states.size() == 1);
        CHECK(s.e_min == 0.0);
    }

    const auto go = generate_instance(ProblemKind::garden, {12, 0, 3}, 2);
    CHECK(go.n_vars() == 12);
    CHECK(enumerate_spectrum(go).valid_count > 0);

    CHECK_THROWS_AS(generate_instance(ProblemKind::exact_cover, {1}, 0), ProblemError);
    CHECK_THROWS_AS(generate_instance(ProblemKind::tsp, {0, 9}, 0), ProblemError);
}
