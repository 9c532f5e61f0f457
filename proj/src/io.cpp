#include "gqw/io.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

namespace gqw {

using json = nlohmann::json;

std::string format_double(double v) { return fmt::format("{}", v); }

namespace {

template <typename T>
json matrix_to_json(const Matrix<T>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
Matrix<T> matrix_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("matrix must be an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j.at(0).size() : 0;
    Matrix<T> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw FormatError("ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<T>();
    }
    return m;
}

json meta_to_json(const ValidityMeta& meta) {
    return std::visit(
        [](const auto& m) -> json {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ExactCoverMeta>) {
                return {{"subsets", matrix_to_json(m.subsets)}};
            } else if constexpr (std::is_same_v<M, TspMeta>) {
                return {{"cities", m.cities}, {"costs", matrix_to_json(m.costs)}, {"lambda", m.lambda}};
            } else if constexpr (std::is_same_v<M, GardenMeta>) {
                return {{"adjacency", matrix_to_json(m.adjacency)},
                        {"companions", matrix_to_json(m.companions)},
                        {"counts", m.counts},
                        {"lambda_pots", m.lambda_pots},
                        {"lambda_species", m.lambda_species}};
            } else {
                return nullptr;
            }
        },
        meta);
}

ValidityMeta meta_from_json(ProblemKind kind, const json& j) {
    if (j.is_null()) {
        if (kind != ProblemKind::custom) throw FormatError("validity_meta missing");
        return std::monostate{};
    }
    switch (kind) {
        case ProblemKind::exact_cover: return ExactCoverMeta{matrix_from_json<int>(j.at("subsets"))};
        case ProblemKind::tsp:
            return TspMeta{j.at("cities").get<std::size_t>(), matrix_from_json<double>(j.at("costs")),
                           j.at("lambda").get<double>()};
        case ProblemKind::garden:
            return GardenMeta{matrix_from_json<int>(j.at("adjacency")),
                              matrix_from_json<int>(j.at("companions")),
                              j.at("counts").get<std::vector<int>>(), j.at("lambda_pots").get<double>(),
                              j.at("lambda_species").get<double>()};
        case ProblemKind::custom: return std::monostate{};
    }
    return std::monostate{};
}

}  // namespace

json instance_to_json(const QuboProblem& problem) {
    const auto n = problem.n_vars();
    json entries = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double q = problem.coeff(i, j);
            if (q != 0.0) entries.push_back(json::array({i, j, q}));
        }
    }
    json j;
    j["kind"] = to_string(problem.kind());
    j["n_vars"] = n;
    j["offset"] = problem.offset;
    j["entries"] = std::move(entries);
    j["validity_meta"] = meta_to_json(problem.validity_meta);
    j["scale_record"] = {{"shift", problem.scale_record.shift},
                         {"factor", problem.scale_record.factor}};
    j["seed"] = problem.seed ? json(*problem.seed) : json(nullptr);
    return j;
}

QuboProblem instance_from_json(const json& j) {
    try {
        const auto kind = problem_kind_from_string(j.at("kind").get<std::string>());
        const auto n = j.at("n_vars").get<std::size_t>();
        QuboProblem p(n, kind);
        p.offset = j.at("offset").get<double>();
        for (const auto& e : j.at("entries")) {
            const auto i = e.at(0).get<std::size_t>();
            const auto k = e.at(1).get<std::size_t>();
            if (i >= n || k >= n) throw FormatError("coefficient index out of range");
            p.add(i, k, e.at(2).get<double>());
        }
        p.validity_meta = meta_from_json(kind, j.value("validity_meta", json(nullptr)));
        if (j.contains("scale_record")) {
            p.scale_record.shift = j["scale_record"].at("shift").get<double>();
            p.scale_record.factor = j["scale_record"].at("factor").get<double>();
        }
        if (j.contains("seed") && !j["seed"].is_null()) p.seed = j["seed"].get<std::uint64_t>();
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed instance: ") + e.what());
    } catch (const ProblemError& e) {
        throw FormatError(std::string("malformed instance: ") + e.what());
    }
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw FormatError("write to " + path.string() + " failed");
}

void write_json(const json& j, const std::filesystem::path& path) {
    write_text(path, j.dump(2) + "\n");
}

void save_instance(const QuboProblem& problem, const std::filesystem::path& path) {
    write_json(instance_to_json(problem), path);
}

QuboProblem load_instance(const std::filesystem::path& path) {
    return instance_from_json(read_json(path));
}

void write_spectrum_csv(const SpectrumTable& spectrum, std::ostream& out) {
    out << "bitstring_index,energy,valid\n";
    for (std::size_t z = 0; z < spectrum.energies.size(); ++z) {
        out << z << ',' << format_double(spectrum.energies[z]) << ','
            << static_cast<int>(spectrum.valid[z]) << '\n';
    }
}

void write_trace_csv(const RunRecord& record, std::ostream& out) {
    const std::size_t bins = record.trace.empty() ? 0 : record.trace.front().bins.size();
    out << "t,gamma,energy_expectation,p_gs";
    for (std::size_t b = 0; b < bins; ++b) out << ",bin_" << b;
    out << '\n';
    for (const auto& s : record.trace) {
        out << format_double(s.t) << ',' << format_double(s.gamma) << ','
            << format_double(s.energy) << ',' << format_double(s.p_gs);
        for (double v : s.bins) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_profile_csv(const GapBins& bins, std::ostream& out) {
    out << "bin_center_E,mean_gap,sample_count\n";
    for (std::size_t b = 0; b < bins.size(); ++b) {
        out << format_double(bins.centers[b]) << ',' << format_double(bins.mean[b]) << ','
            << bins.count[b] << '\n';
    }
}

json fit_to_json(const PolynomialFit& fit) {
    return {{"degree", fit.degree},
            {"domain", {fit.e_min, fit.e_max}},
            {"coefficients", fit.coefficients},
            {"residual", fit.residual}};
}

// ---------------------------------------------------------------------------
// Spectrum cache: "GQWSPEC1", u32 N, u32 constraint_only, f64 energies, u8 valid.
// ---------------------------------------------------------------------------

std::string spectrum_cache_key(const QuboProblem& problem) {
    auto j = instance_to_json(problem);
    j.erase("seed");
    const auto text = j.dump();
    const auto* data = reinterpret_cast<const Bytef*>(text.data());
    const auto len = static_cast<uInt>(text.size());
    const auto crc = crc32(0L, data, len);
    const auto adl = adler32(1L, data, len);
    return fmt::format("{:08x}{:08x}", crc, adl);
}

void write_spectrum_cache(const SpectrumTable& spectrum, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "cache assumes little endian");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write cache " + tmp);
        out.write("GQWSPEC1", 8);
        const std::uint32_t n = static_cast<std::uint32_t>(spectrum.n_vars);
        const std::uint32_t flags = spectrum.constraint_only ? 1u : 0u;
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(&flags), 4);
        out.write(reinterpret_cast<const char*>(spectrum.energies.data()),
                  static_cast<std::streamsize>(spectrum.energies.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(spectrum.valid.data()),
                  static_cast<std::streamsize>(spectrum.valid.size()));
        if (!out) throw FormatError("cache write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

SpectrumTable read_spectrum_cache(const std::filesystem::path& path, ProblemKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open cache " + path.string());
    char magic[8];
    std::uint32_t n = 0, flags = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&flags), 4);
    if (!in || std::memcmp(magic, "GQWSPEC1", 8) != 0 || n > 40) {
        throw FormatError(path.string() + " is not a spectrum cache");
    }
    SpectrumTable t;
    t.n_vars = n;
    const std::size_t dim = std::size_t{1} << n;
    t.energies.resize(dim);
    t.valid.resize(dim);
    in.read(reinterpret_cast<char*>(t.energies.data()), static_cast<std::streamsize>(dim * sizeof(double)));
    in.read(reinterpret_cast<char*>(t.valid.data()), static_cast<std::streamsize>(dim));
    if (!in) throw FormatError(path.string() + " is truncated");
    t.constraint_only = (flags & 1u) != 0 || kind == ProblemKind::exact_cover;
    finalize_spectrum(t);
    return t;
}

}  // namespace gqw
