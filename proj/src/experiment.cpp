#include "gqw/experiment.hpp"

#include "gqw/engine.hpp"
#include "gqw/io.hpp"
#include "gqw/kernels.hpp"
#include "gqw/metrics.hpp"
#include "gqw/random.hpp"
#include "gqw/spectral.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gqw {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::gqw: return "gqw";
        case Algorithm::gqw_oracle: return "gqw_oracle";
        case Algorithm::qw: return "qw";
        case Algorithm::qa: return "qa";
    }
    return "gqw";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "gqw") return Algorithm::gqw;
    if (name == "gqw_oracle") return Algorithm::gqw_oracle;
    if (name == "qw") return Algorithm::qw;
    if (name == "qa") return Algorithm::qa;
    throw PlanError("unknown algorithm '" + name + "'");
}

std::vector<double> t_grid_range(double start, double stop, double step) {
    if (!(step > 0.0) || !(start > 0.0) || !(stop >= start)) {
        throw PlanError("T grid needs 0 < start <= stop and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Round to 12 significant decimals so 0.1-steps print as written.
        const double v = start + static_cast<double>(i) * step;
        grid[i] = std::stod(fmt::format("{:.12g}", v));
    }
    return grid;
}

std::vector<double> default_t_grid() { return t_grid_range(0.1, 12.0, 0.1); }

// ---------------------------------------------------------------------------
// Plan
// ---------------------------------------------------------------------------

void ExperimentPlan::validate() const {
    if (instances.empty()) throw PlanError("plan has no instances");
    std::set<std::string> ids;
    for (const auto& inst : instances) {
        if (inst.id.empty()) throw PlanError("instance without id");
        if (!ids.insert(inst.id).second) throw PlanError("duplicate instance id '" + inst.id + "'");
        if (inst.file && !fs::exists(*inst.file)) {
            throw PlanError("instance file " + inst.file->string() + " does not exist");
        }
    }
    if (algorithms.empty()) throw PlanError("plan has no algorithms");
    std::set<Algorithm> algs(algorithms.begin(), algorithms.end());
    if (algs.size() != algorithms.size()) throw PlanError("duplicate algorithm in plan");
    if (t_grid.empty()) throw PlanError("empty T grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw PlanError("T values must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw PlanError("T grid must be strictly increasing");
    }
    if (!(dt > 0.0)) throw PlanError("dt must be positive");
    if (optimizer.n_restarts < 1) throw PlanError("optimizer needs at least one restart");
    const bool tunes_gqw = algs.count(Algorithm::gqw) > 0;
    const std::size_t min_evals = tunes_gqw ? HyperParams::size + 1 : 2;
    if (algs.count(Algorithm::gqw) || algs.count(Algorithm::qw)) {
        if (optimizer.max_evals < min_evals) {
            throw PlanError("optimizer budget must be at least " + std::to_string(min_evals));
        }
    }
    if (!(p_target > 0.0 && p_target < 1.0)) throw PlanError("p_target must be in (0, 1)");
    if (gap_bins < 1) throw PlanError("gap_bins must be positive");
}

namespace {

InstanceSpec spec_from_json(const json& j, const fs::path& base_dir) {
    InstanceSpec s;
    if (j.contains("file")) {
        fs::path f = j["file"].get<std::string>();
        if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
        s.file = f;
        s.id = j.value("id", f.stem().string());
        return s;
    }
    s.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    s.size.n_vars = j.value("n_vars", std::size_t{0});
    s.size.cities = j.value("cities", std::size_t{0});
    s.size.species = j.value("species", std::size_t{3});
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto n = s.kind == ProblemKind::tsp ? (s.size.cities - 1) * (s.size.cities - 1) : s.size.n_vars;
    s.id = j.value("id", fmt::format("{}_n{}_s{}", to_string(s.kind), n, s.seed));
    return s;
}

}  // namespace

ExperimentPlan ExperimentPlan::from_json(const json& j, const fs::path& base_dir) {
    ExperimentPlan plan;
    try {
        if (j.contains("instances")) {
            for (const auto& inst : j.at("instances")) plan.instances.push_back(spec_from_json(inst, base_dir));
        }
        if (j.contains("generate")) {
            const auto& g = j.at("generate");
            const auto count = g.at("count").get<std::size_t>();
            const auto base_seed = g.value("seed", std::uint64_t{0});
            for (std::size_t i = 0; i < count; ++i) {
                json inst = g;
                inst.erase("count");
                inst["seed"] = base_seed + i;
                plan.instances.push_back(spec_from_json(inst, base_dir));
            }
        }
        for (const auto& a : j.at("algorithms")) plan.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
        if (!j.contains("t_grid")) {
            plan.t_grid = default_t_grid();
        } else if (j["t_grid"].is_array()) {
            plan.t_grid = j["t_grid"].get<std::vector<double>>();
        } else {
            const auto& g = j["t_grid"];
            plan.t_grid = t_grid_range(g.at("start").get<double>(), g.at("stop").get<double>(),
                                       g.at("step").get<double>());
        }
        plan.dt = j.value("dt", 1e-3);
        plan.seed = j.value("seed", std::uint64_t{0});
        plan.p_target = j.value("p_target", 0.9999);
        plan.rescale = j.value("rescale", true);
        plan.record_traces = j.value("record_traces", false);
        plan.deterministic = j.value("deterministic", true);
        plan.gap_bins = j.value("gap_bins", std::size_t{100});
        if (j.contains("out")) plan.out_dir = j["out"].get<std::string>();
        if (j.contains("optimizer")) {
            const auto& o = j["optimizer"];
            auto& c = plan.optimizer;
            c.n_restarts = o.value("n_restarts", c.n_restarts);
            c.max_evals = o.value("max_evals", c.max_evals);
            c.initial_step = o.value("initial_step", c.initial_step);
            c.tolerance = o.value("tolerance", c.tolerance);
            c.shots = o.value("shots", c.shots);
        }
    } catch (const json::exception& e) {
        throw PlanError(std::string("malformed plan: ") + e.what());
    } catch (const ProblemError& e) {
        throw PlanError(std::string("malformed plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

json ExperimentPlan::to_json() const {
    json insts = json::array();
    for (const auto& s : instances) {
        if (s.file) {
            insts.push_back({{"id", s.id}, {"file", s.file->string()}});
        } else {
            insts.push_back({{"id", s.id},
                             {"kind", gqw::to_string(s.kind)},
                             {"n_vars", s.size.n_vars},
                             {"cities", s.size.cities},
                             {"species", s.size.species},
                             {"seed", s.seed}});
        }
    }
    json algs = json::array();
    for (auto a : algorithms) algs.push_back(gqw::to_string(a));
    return {{"instances", insts},
            {"algorithms", algs},
            {"t_grid", t_grid},
            {"dt", dt},
            {"seed", seed},
            {"p_target", p_target},
            {"rescale", rescale},
            {"record_traces", record_traces},
            {"deterministic", deterministic},
            {"gap_bins", gap_bins},
            {"out", out_dir.string()},
            {"optimizer",
             {{"n_restarts", optimizer.n_restarts},
              {"max_evals", optimizer.max_evals},
              {"initial_step", optimizer.initial_step},
              {"tolerance", optimizer.tolerance},
              {"shots", optimizer.shots}}}};
}

// ---------------------------------------------------------------------------
// Report rows
// ---------------------------------------------------------------------------

const char* const kReportHeader =
    "instance_id,kind,N,T,algorithm,p_gs,e_psi,s_q,r,tts,n_opt,seed,checksum";

std::string ReportRow::key() const {
    return instance_id + "|" + algorithm + "|" + format_double(t);
}

namespace {

std::string row_checksum(const std::string& body) {
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    return fmt::format("{:08x}", crc);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::string format_report_row(const ReportRow& row) {
    const auto body = fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", row.instance_id, row.kind,
                                  row.n, format_double(row.t), row.algorithm,
                                  format_double(row.p_gs), format_double(row.e_psi),
                                  format_double(row.s_q), format_double(row.r),
                                  format_double(row.tts), row.n_opt, row.seed);
    return body + "," + row_checksum(body);
}

std::optional<ReportRow> parse_report_row(const std::string& line) {
    const auto cut = line.rfind(',');
    if (cut == std::string::npos) return std::nullopt;
    const auto body = line.substr(0, cut);
    if (line.substr(cut + 1) != row_checksum(body)) return std::nullopt;
    const auto f = split(body, ',');
    if (f.size() != 12) return std::nullopt;
    try {
        ReportRow r;
        r.instance_id = f[0];
        r.kind = f[1];
        r.n = std::stoul(f[2]);
        r.t = std::stod(f[3]);
        r.algorithm = f[4];
        r.p_gs = std::stod(f[5]);
        r.e_psi = std::stod(f[6]);
        r.s_q = std::stod(f[7]);
        r.r = std::stod(f[8]);
        r.tts = std::stod(f[9]);
        r.n_opt = std::stoul(f[10]);
        r.seed = std::stoull(f[11]);
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

ReportReadResult read_report(const fs::path& path) {
    ReportReadResult result;
    std::ifstream in(path);
    if (!in) return result;
    std::string line;
    if (!std::getline(in, line)) return result;
    if (line != kReportHeader) {
        throw PlanError(path.string() + " is missing report columns (header '" + line + "')");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (auto row = parse_report_row(line)) {
            result.rows.push_back(std::move(*row));
        } else {
            ++result.rejected;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

QuboProblem resolve_instance(const InstanceSpec& spec, bool rescale_energies) {
    QuboProblem p = spec.file ? load_instance(*spec.file)
                              : generate_instance(spec.kind, spec.size, spec.seed);
    if (rescale_energies) {
        const bool already = p.scale_record.factor != 1.0 || p.scale_record.shift != 0.0;
        if (!already) p = rescale(p);
    }
    return p;
}

SpectrumTable load_or_enumerate(const QuboProblem& problem, const std::optional<fs::path>& cache_dir) {
    if (!cache_dir) return enumerate_spectrum(problem);
    const auto path = *cache_dir / (spectrum_cache_key(problem) + ".spec");
    if (fs::exists(path)) {
        try {
            return read_spectrum_cache(path, problem.kind());
        } catch (const FormatError& e) {
            spdlog::warn("ignoring spectrum cache {}: {}", path.string(), e.what());
        }
    }
    auto table = enumerate_spectrum(problem);
    try {
        write_spectrum_cache(table, path);
    } catch (const std::exception& e) {
        spdlog::warn("could not write spectrum cache {}: {}", path.string(), e.what());
    }
    return table;
}

std::string trace_file_name(const std::string& instance_id, Algorithm algorithm, double t) {
    return fmt::format("{}_{}_T{}.csv", instance_id, to_string(algorithm), format_double(t));
}

namespace {

struct Cell {
    std::size_t instance = 0;
    Algorithm algorithm = Algorithm::qa;
    std::size_t t_index = 0;
    double t = 0.0;
    std::uint64_t seed = 0;
};

struct PreparedInstance {
    QuboProblem problem;
    SpectrumTable spectrum;
    std::optional<GapProfile> profile;
};

std::uint64_t cell_seed(std::uint64_t plan_seed, std::size_t instance, Algorithm a, std::size_t t_index) {
    return derive_seed(derive_seed(derive_seed(plan_seed, instance), static_cast<std::uint64_t>(a)),
                       t_index);
}

ReportRow run_cell(const ExperimentPlan& plan, const InstanceSpec& spec, const PreparedInstance& inst,
                   const Cell& cell, bool parallel_restarts) {
    const auto& spectrum = inst.spectrum;
    EvolutionConfig ecfg;
    ecfg.total_time = cell.t;
    ecfg.dt = std::min(plan.dt, cell.t);
    ecfg.deterministic = plan.deterministic;

    RunRecord record;
    std::size_t n_opt = 0;
    std::optional<Schedule> best_schedule;
    switch (cell.algorithm) {
        case Algorithm::qa:
            best_schedule = linear_qa_schedule(cell.t);
            record = evolve(spectrum, *best_schedule, ecfg).record;
            break;
        case Algorithm::gqw_oracle:
            best_schedule = spectral_oracle_schedule(*inst.profile, cell.t);
            record = evolve(spectrum, *best_schedule, ecfg).record;
            break;
        case Algorithm::gqw:
        case Algorithm::qw: {
            auto cfg = plan.optimizer;
            cfg.seed = cell.seed;
            cfg.dt = plan.dt;
            cfg.deterministic = plan.deterministic;
            cfg.parallel_restarts = parallel_restarts;
            const auto outcome = cell.algorithm == Algorithm::gqw
                                     ? optimize_gqw(spectrum, cell.t, cfg)
                                     : optimize_qw(spectrum, cell.t, cfg);
            record = outcome.best_record;
            n_opt = outcome.evals;
            best_schedule = Schedule::from_json(json::parse(record.schedule));
            write_json(to_json(outcome),
                       plan.out_dir / "outcomes" /
                           fmt::format("{}_{}_T{}.json", spec.id, to_string(cell.algorithm),
                                       format_double(cell.t)));
            break;
        }
    }
    if (plan.record_traces) {
        auto traced = ecfg;
        traced.record = true;
        const auto rec = evolve(spectrum, *best_schedule, traced).record;
        std::ostringstream csv;
        write_trace_csv(rec, csv);
        write_text(plan.out_dir / "traces" / trace_file_name(spec.id, cell.algorithm, cell.t), csv.str());
    }

    ReportRow row;
    row.instance_id = spec.id;
    row.kind = to_string(inst.problem.kind());
    row.n = inst.problem.n_vars();
    row.t = cell.t;
    row.algorithm = to_string(cell.algorithm);
    row.p_gs = record.p_gs;
    row.e_psi = record.e_psi;
    row.s_q = record.s_q;
    row.r = spectrum.e_max > 0.0 ? record.e_psi / spectrum.e_max : 0.0;
    row.tts = record.p_gs > 0.0
                  ? time_to_solution(record.p_gs, cell.t, static_cast<double>(n_opt), plan.p_target)
                  : std::numeric_limits<double>::infinity();
    row.n_opt = n_opt;
    row.seed = cell.seed;
    return row;
}

}  // namespace

RunSummary run_plan(const ExperimentPlan& plan, const std::optional<fs::path>& cache_dir) {
    plan.validate();
    fs::create_directories(plan.out_dir);
    write_json(plan.to_json(), plan.out_dir / "plan.json");

    RunSummary summary;
    summary.report = plan.out_dir / "report.csv";

    // Resume: keep intact rows, drop partial or corrupted lines.
    auto existing = read_report(summary.report);
    summary.rejected_rows = existing.rejected;
    if (existing.rejected > 0 || (!fs::exists(summary.report))) {
        if (existing.rejected > 0) {
            spdlog::warn("{}: dropping {} corrupted row(s)", summary.report.string(), existing.rejected);
        }
        std::string content = std::string(kReportHeader) + "\n";
        for (const auto& r : existing.rows) content += format_report_row(r) + "\n";
        write_text(summary.report, content);
    }
    std::set<std::string> done;
    for (const auto& r : existing.rows) done.insert(r.key());

    std::vector<Cell> pending;
    for (std::size_t i = 0; i < plan.instances.size(); ++i) {
        for (auto a : plan.algorithms) {
            for (std::size_t k = 0; k < plan.t_grid.size(); ++k) {
                ++summary.total_cells;
                ReportRow probe;
                probe.instance_id = plan.instances[i].id;
                probe.algorithm = to_string(a);
                probe.t = plan.t_grid[k];
                if (done.count(probe.key())) {
                    ++summary.skipped;
                    continue;
                }
                pending.push_back({i, a, k, plan.t_grid[k], cell_seed(plan.seed, i, a, k)});
            }
        }
    }
    if (pending.empty()) return summary;

    // Only instances with pending cells are loaded.
    std::vector<std::optional<PreparedInstance>> prepared(plan.instances.size());
    const bool needs_profile = std::count(plan.algorithms.begin(), plan.algorithms.end(),
                                          Algorithm::gqw_oracle) > 0;
    for (const auto& c : pending) {
        auto& slot = prepared[c.instance];
        if (slot) continue;
        PreparedInstance p;
        const auto& spec = plan.instances[c.instance];
        p.problem = resolve_instance(spec, plan.rescale);
        if (!spec.file) save_instance(p.problem, plan.out_dir / "instances" / (spec.id + ".json"));
        p.spectrum = load_or_enumerate(p.problem, cache_dir);
        if (needs_profile) p.profile = analyze_gaps(p.spectrum, plan.gap_bins);
        slot = std::move(p);
    }

    std::ofstream report(summary.report, std::ios::app | std::ios::binary);
    if (!report) throw PlanError("cannot append to " + summary.report.string());

    const auto count = static_cast<std::int64_t>(pending.size());
    const bool parallel_cells = count > 1 && kernels::max_threads() > 1;
    std::vector<std::optional<std::string>> lines(pending.size());
    std::vector<std::exception_ptr> errors(pending.size());
    std::size_t next_commit = 0;

#pragma omp parallel for schedule(dynamic, 1) if (parallel_cells)
    for (std::int64_t ci = 0; ci < count; ++ci) {
        const auto idx = static_cast<std::size_t>(ci);
        const auto& cell = pending[idx];
        try {
            const auto row = run_cell(plan, plan.instances[cell.instance], *prepared[cell.instance],
                                      cell, !parallel_cells);
            lines[idx] = format_report_row(row);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
#pragma omp critical(gqw_report_commit)
        {
            while (next_commit < lines.size() && lines[next_commit]) {
                report << *lines[next_commit] << '\n';
                ++next_commit;
            }
            report.flush();
        }
    }
    summary.executed = next_commit;
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

Figure figure_from_string(const std::string& name) {
    if (name == "sq_vs_t") return Figure::sq_vs_t;
    if (name == "t_vs_n") return Figure::t_vs_n;
    if (name == "tts_vs_n") return Figure::tts_vs_n;
    if (name == "evolution_traces") return Figure::evolution_traces;
    throw PlanError("unknown figure '" + name + "'");
}

namespace {

struct GroupKey {
    std::size_t n;
    std::string algorithm;
    double t;
    bool operator<(const GroupKey& o) const {
        return std::tie(n, algorithm, t) < std::tie(o.n, o.algorithm, o.t);
    }
};

std::map<GroupKey, std::vector<const ReportRow*>> group_rows(const std::vector<ReportRow>& report) {
    std::map<GroupKey, std::vector<const ReportRow*>> groups;
    for (const auto& r : report) groups[{r.n, r.algorithm, r.t}].push_back(&r);
    return groups;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string export_sq_vs_t(const std::vector<ReportRow>& report) {
    std::string out = "N,T,algorithm,geo_mean_sq,geo_std_sq,instances\n";
    for (const auto& [key, rows] : group_rows(report)) {
        std::vector<double> sq;
        for (const auto* r : rows) sq.push_back(r->s_q);
        const auto g = geometric_aggregate(sq);
        out += fmt::format("{},{},{},{},{},{}\n", key.n, format_double(key.t), key.algorithm,
                           format_double(g.mean), format_double(g.stddev), rows.size());
    }
    return out;
}

void append_fits(std::string& out, const std::string& prefix, const std::vector<ScalingPoint>& pts,
                 bool linear) {
    if (pts.size() < 3) return;
    if (linear) {
        const auto f = fit_scaling(pts, ScalingModel::linear);
        out += fmt::format("{},fit_linear,,,{},{},{}\n", prefix, format_double(f.a),
                           format_double(f.b), format_double(f.residual));
    }
    const auto f = fit_scaling(pts, ScalingModel::exponential);
    out += fmt::format("{},fit_exponential,,,{},{},{}\n", prefix, format_double(f.a),
                       format_double(f.b), format_double(f.residual));
}

std::string export_t_vs_n(const std::vector<ReportRow>& report, const ExportOptions& options) {
    // Geometric-mean S_q(T) per (algorithm, N).
    std::map<std::string, std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>>> curves;
    for (const auto& [key, rows] : group_rows(report)) {
        std::vector<double> sq;
        for (const auto* r : rows) sq.push_back(r->s_q);
        auto& c = curves[key.algorithm][key.n];
        c.first.push_back(key.t);
        c.second.push_back(geometric_aggregate(sq).mean);
    }
    std::string out = "algorithm,threshold,record,N,t_sq,a,b,residual\n";
    for (const auto& [alg, by_n] : curves) {
        for (double thr : options.thresholds) {
            const auto prefix = fmt::format("{},{}", alg, format_double(thr));
            std::vector<ScalingPoint> pts;
            for (const auto& [n, curve] : by_n) {
                const auto cross = threshold_crossing(curve.first, curve.second, thr);
                out += fmt::format("{},point,{},{},,,\n", prefix, n, opt(cross));
                if (cross) pts.push_back({static_cast<double>(n), *cross});
            }
            append_fits(out, prefix, pts, true);
        }
    }
    return out;
}

std::string export_tts_vs_n(const std::vector<ReportRow>& report) {
    struct Best {
        double tts = std::numeric_limits<double>::infinity();
        double t = 0.0;
    };
    std::map<std::string, std::map<std::size_t, Best>> best;
    for (const auto& [key, rows] : group_rows(report)) {
        std::vector<double> tts;
        bool finite = true;
        for (const auto* r : rows) {
            finite = finite && std::isfinite(r->tts);
            tts.push_back(r->tts);
        }
        auto& b = best[key.algorithm][key.n];
        if (!finite) continue;
        const double g = geometric_aggregate(tts).mean;
        if (g < b.tts) b = {g, key.t};
    }
    std::string out = "algorithm,record,N,best_T,tts,a,b,residual\n";
    for (const auto& [alg, by_n] : best) {
        std::vector<ScalingPoint> pts;
        for (const auto& [n, b] : by_n) {
            if (!std::isfinite(b.tts)) {
                out += fmt::format("{},point,{},,,,,\n", alg, n);
                continue;
            }
            out += fmt::format("{},point,{},{},{},,,\n", alg, n, format_double(b.t), format_double(b.tts));
            pts.push_back({static_cast<double>(n), b.tts});
        }
        if (pts.size() >= 3) {
            const auto f = fit_scaling(pts, ScalingModel::exponential);
            out += fmt::format("{},fit_exponential,,,,{},{},{}\n", alg, format_double(f.a),
                               format_double(f.b), format_double(f.residual));
        }
    }
    return out;
}

std::string export_traces(const std::vector<ReportRow>& report, const ExportOptions& options) {
    std::string out;
    std::string header;
    std::size_t found = 0;
    for (const auto& r : report) {
        const auto path = options.trace_dir /
                          trace_file_name(r.instance_id, algorithm_from_string(r.algorithm), r.t);
        std::ifstream in(path);
        if (!in) continue;
        std::string line;
        std::getline(in, line);
        if (header.empty()) {
            header = "instance_id,algorithm,T," + line;
            out = header + "\n";
        }
        ++found;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            out += fmt::format("{},{},{},{}\n", r.instance_id, r.algorithm, format_double(r.t), line);
        }
    }
    if (found == 0) {
        throw PlanError("no trace files under " + options.trace_dir.string() +
                        "; run the plan with record_traces enabled");
    }
    return out;
}

}  // namespace

std::string export_figure_data(const std::vector<ReportRow>& report, Figure figure,
                               const ExportOptions& options) {
    if (report.empty()) throw PlanError("empty report");
    switch (figure) {
        case Figure::sq_vs_t: return export_sq_vs_t(report);
        case Figure::t_vs_n: return export_t_vs_n(report, options);
        case Figure::tts_vs_n: return export_tts_vs_n(report);
        case Figure::evolution_traces: return export_traces(report, options);
    }
    return {};
}

}  // namespace gqw
