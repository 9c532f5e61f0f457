#include "gqw/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace gqw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / "gqw_io_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("doubles print in shortest round-trip form") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12.0, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("instances survive a json round trip") {
    const auto dir = scratch("instances");
    for (auto [kind, size] : {std::pair{ProblemKind::exact_cover, SizeParams{10}},
                              std::pair{ProblemKind::tsp, SizeParams{0, 4}},
                              std::pair{ProblemKind::garden, SizeParams{12, 0, 3}}}) {
        const auto p = rescale(generate_instance(kind, size, 3));
        const auto path = dir / (to_string(kind) + ".json");
        save_instance(p, path);
        const auto q = load_instance(path);
        CHECK(q.kind() == p.kind());
        CHECK(q.n_vars() == p.n_vars());
        CHECK(q.offset == p.offset);
        CHECK(q.scale_record.factor == p.scale_record.factor);
        CHECK(q.seed == p.seed);
        for (std::uint64_t z = 0; z < (std::uint64_t{1} << p.n_vars()); ++z) {
            REQUIRE(q.energy(z) == p.energy(z));
            REQUIRE(q.is_valid(z) == p.is_valid(z));
        }
        CHECK(spectrum_cache_key(q) == spectrum_cache_key(p));
    }
    CHECK_THROWS(instance_from_json(nlohmann::json{{"kind", "exact_cover"}}));
}

TEST_CASE("spectrum cache") {
    const auto dir = scratch("cache");
    const auto p = rescale(generate_instance(ProblemKind::exact_cover, {8}, 1));
    const auto s = enumerate_spectrum(p);
    const auto path = dir / (spectrum_cache_key(p) + ".bin");
    write_spectrum_cache(s, path);
    const auto back = read_spectrum_cache(path, p.kind());
    CHECK(back.energies == s.energies);
    CHECK(back.valid == s.valid);
    CHECK(back.ground_states == s.ground_states);
    CHECK(back.e_max_valid == s.e_max_valid);

    auto other = generate_instance(ProblemKind::exact_cover, {8}, 2);
    CHECK(spectrum_cache_key(other) != spectrum_cache_key(p));

    write_text(dir / "junk.bin", "nope");
    CHECK_THROWS_AS(read_spectrum_cache(dir / "junk.bin", p.kind()), FormatError);
}

TEST_CASE("csv writers") {
    const auto s = enumerate_spectrum(build_exact_cover(Matrix<int>{{1}, {1}}));
    std::ostringstream spec;
    write_spectrum_csv(s, spec);
    CHECK(spec.str() == "bitstring_index,energy,valid\n0,1,0\n1,0,1\n2,0,1\n3,1,0\n");

    RunRecord rec;
    rec.trace.push_back({0.0, 2.0, 0.5, 0.25, {0.75, 0.25}});
    std::ostringstream tr;
    write_trace_csv(rec, tr);
    CHECK(tr.str() == "t,gamma,energy_expectation,p_gs,bin_0,bin_1\n0,2,0.5,0.25,0.75,0.25\n");

    GapBins b;
    b.centers = {1.0, 3.0};
    b.mean = {0.5, 2.0};
    b.count = {4, 0};
    std::ostringstream pr;
    write_profile_csv(b, pr);
    CHECK(pr.str() == "bin_center_E,mean_gap,sample_count\n1,0.5,4\n3,2,0\n");

    PolynomialFit fit;
    fit.degree = 1;
    fit.e_min = 0;
    fit.e_max = 10;
    fit.coefficients = {1, 2};
    const auto j = fit_to_json(fit);
    CHECK(j.at("degree") == 1);
    CHECK(j.at("coefficients").size() == 2);
}
