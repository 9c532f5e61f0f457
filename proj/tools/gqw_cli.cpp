// gqw: instance generation, spectra, single runs, schedule tuning and
// experiment plans from the command line.

#include "gqw/engine.hpp"
#include "gqw/experiment.hpp"
#include "gqw/io.hpp"
#include "gqw/kernels.hpp"
#include "gqw/metrics.hpp"
#include "gqw/optimizer.hpp"
#include "gqw/spectral.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::uint64_t seed = 0;
    double dt = 1e-3;
    int threads = 0;
    bool deterministic = true;
    fs::path out = ".";
};

std::optional<fs::path> cache_dir() {
    if (const char* env = std::getenv("GQW_CACHE"); env && *env) return fs::path(env);
    return std::nullopt;
}

struct Loaded {
    gqw::QuboProblem problem;
    gqw::SpectrumTable spectrum;
};

Loaded load(const fs::path& instance, bool rescale) {
    gqw::InstanceSpec spec;
    spec.file = instance;
    Loaded l;
    l.problem = gqw::resolve_instance(spec, rescale);
    l.spectrum = gqw::load_or_enumerate(l.problem, cache_dir());
    return l;
}

json run_json(const gqw::RunRecord& r, const gqw::SpectrumTable& s) {
    return {{"e_psi", r.e_psi},
            {"p_gs", r.p_gs},
            {"s_q", r.s_q},
            {"r", s.e_max > 0.0 ? r.e_psi / s.e_max : 0.0},
            {"steps", r.steps},
            {"norm_error", r.norm_error},
            {"wall_seconds", r.wall_seconds},
            {"schedule", json::parse(r.schedule)}};
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string kind = "exact_cover";
    std::size_t n = 12;
    std::size_t cities = 4;
    std::size_t species = 3;
    std::size_t count = 1;
    bool no_rescale = false;
};

int cmd_gen(const Globals& g, const GenArgs& a) {
    const auto kind = gqw::problem_kind_from_string(a.kind);
    for (std::size_t i = 0; i < a.count; ++i) {
        gqw::InstanceSpec spec;
        spec.kind = kind;
        spec.size = {a.n, a.cities, a.species};
        spec.seed = g.seed + i;
        const auto p = gqw::resolve_instance(spec, !a.no_rescale);
        const auto path = g.out / fmt::format("{}_n{}_s{}.json", gqw::to_string(kind), p.n_vars(), spec.seed);
        gqw::save_instance(p, path);
        std::cout << path.string() << '\n';
    }
    return 0;
}

struct SpectrumArgs {
    fs::path instance;
    bool profile = false;
    std::size_t bins = gqw::kDefaultGapBins;
    std::size_t degree = gqw::kDefaultFitDegree;
    bool no_rescale = false;
};

int cmd_spectrum(const Globals& g, const SpectrumArgs& a) {
    const auto l = load(a.instance, !a.no_rescale);
    const auto stem = a.instance.stem().string();
    std::ostringstream csv;
    gqw::write_spectrum_csv(l.spectrum, csv);
    gqw::write_text(g.out / (stem + "_spectrum.csv"), csv.str());
    json summary = {{"n_vars", l.spectrum.n_vars},
                    {"e_min", l.spectrum.e_min},
                    {"e_max", l.spectrum.e_max},
                    {"e_max_valid", l.spectrum.e_max_valid},
                    {"valid_count", l.spectrum.valid_count},
                    {"ground_states", l.spectrum.ground_states}};
    if (a.profile) {
        const auto profile = gqw::analyze_gaps(l.spectrum, a.bins, a.degree);
        std::ostringstream pcsv;
        gqw::write_profile_csv(profile.bins, pcsv);
        gqw::write_text(g.out / (stem + "_profile.csv"), pcsv.str());
        gqw::write_json(gqw::fit_to_json(profile.fit), g.out / (stem + "_fit.json"));
        summary["profile_trend"] = gqw::profile_trend(profile.bins);
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

struct EvolveArgs {
    fs::path instance;
    std::string schedule = "qa";
    double t = 1.0;
    double gamma = -1.0;
    std::vector<double> params;
    bool record = false;
    std::size_t stride = 0;
    std::size_t bins = 50;
    bool dump = false;
    bool convergence_check = false;
    bool no_rescale = false;
};

gqw::Schedule make_schedule(const EvolveArgs& a, const gqw::SpectrumTable& s) {
    if (a.schedule == "qa") return gqw::linear_qa_schedule(a.t);
    if (a.schedule == "constant") {
        const double gamma = a.gamma >= 0.0 ? a.gamma : gqw::search_optimal_gamma(static_cast<unsigned>(s.n_vars));
        return gqw::constant_schedule(gamma, a.t);
    }
    if (a.schedule == "gqw") {
        if (a.params.size() != gqw::HyperParams::size) {
            throw std::invalid_argument("--params needs 6 values (lambda0..lambda3, k_start, k_end)");
        }
        return gqw::gqw_schedule_from_vector(a.params, a.t, {});
    }
    if (a.schedule == "oracle") return gqw::spectral_oracle_schedule(gqw::analyze_gaps(s), a.t);
    // Anything else is a schedule descriptor file; its T is replaced by --T.
    auto j = gqw::read_json(a.schedule);
    j["T"] = a.t;
    return gqw::Schedule::from_json(j);
}

int cmd_evolve(const Globals& g, const EvolveArgs& a) {
    const auto l = load(a.instance, !a.no_rescale);
    const auto schedule = make_schedule(a, l.spectrum);
    gqw::EvolutionConfig cfg;
    cfg.total_time = a.t;
    cfg.dt = std::min(g.dt, a.t);
    cfg.deterministic = g.deterministic;
    cfg.record = a.record;
    cfg.record_stride = a.stride;
    cfg.energy_bins = a.bins;
    const auto result = gqw::evolve(l.spectrum, schedule, cfg);
    auto out = run_json(result.record, l.spectrum);
    if (a.convergence_check) {
        auto half = cfg;
        half.dt = cfg.dt / 2;
        half.record = false;
        const auto fine = gqw::evolve(l.spectrum, schedule, half);
        out["convergence"] = {{"dt", half.dt},
                              {"s_q", fine.record.s_q},
                              {"delta_s_q", fine.record.s_q - result.record.s_q}};
    }
    const auto stem = a.instance.stem().string();
    if (a.record) {
        std::ostringstream csv;
        gqw::write_trace_csv(result.record, csv);
        gqw::write_text(g.out / (stem + "_trace.csv"), csv.str());
    }
    if (a.dump) gqw::write_state_dump(result.state, g.out / (stem + "_state.bin"));
    gqw::write_json(out, g.out / (stem + "_run.json"));
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct OptimizeArgs {
    fs::path instance;
    std::string algorithm = "gqw";
    double t = 12.0;
    std::size_t restarts = 20;
    std::size_t evals = 100;
    std::size_t shots = 0;
    bool no_rescale = false;
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a) {
    const auto l = load(a.instance, !a.no_rescale);
    gqw::OptimizerConfig cfg;
    cfg.n_restarts = a.restarts;
    cfg.max_evals = a.evals;
    cfg.seed = g.seed;
    cfg.dt = g.dt;
    cfg.deterministic = g.deterministic;
    cfg.shots = a.shots;
    const auto outcome = a.algorithm == "qw" ? gqw::optimize_qw(l.spectrum, a.t, cfg)
                                             : gqw::optimize_gqw(l.spectrum, a.t, cfg);
    const auto j = gqw::to_json(outcome);
    gqw::write_json(j, g.out / fmt::format("{}_{}_T{}.json", a.instance.stem().string(), a.algorithm,
                                           gqw::format_double(a.t)));
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct PlanArgs {
    fs::path plan;
};

int cmd_plan_run(Globals g, const PlanArgs& a, bool out_given, bool seed_given, bool dt_given) {
    const auto j = gqw::read_json(a.plan);
    auto plan = gqw::ExperimentPlan::from_json(j, a.plan.parent_path());
    if (out_given) plan.out_dir = g.out;
    if (seed_given) plan.seed = g.seed;
    if (dt_given) plan.dt = g.dt;
    plan.deterministic = g.deterministic;
    const auto s = gqw::run_plan(plan, cache_dir());
    std::cout << json{{"report", s.report.string()},
                      {"cells", s.total_cells},
                      {"skipped", s.skipped},
                      {"executed", s.executed},
                      {"rejected_rows", s.rejected_rows}}
                     .dump(2)
              << '\n';
    return 0;
}

struct ExportArgs {
    fs::path report;
    std::string figure = "sq_vs_t";
    fs::path traces;
    std::vector<double> thresholds{0.01, 0.1, 0.9};
};

int cmd_export(const Globals& g, const ExportArgs& a) {
    const auto rep = gqw::read_report(a.report);
    if (rep.rejected > 0) spdlog::warn("{} corrupted row(s) ignored", rep.rejected);
    gqw::ExportOptions opts;
    opts.thresholds = a.thresholds;
    opts.trace_dir = a.traces.empty() ? a.report.parent_path() / "traces" : a.traces;
    const auto csv = gqw::export_figure_data(rep.rows, gqw::figure_from_string(a.figure), opts);
    const auto path = g.out / (a.figure + ".csv");
    gqw::write_text(path, csv);
    std::cout << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guided quantum walk simulator"};
    app.require_subcommand(1);

    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    auto* dt_opt = app.add_option("--dt", g.dt, "Trotter step")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads, "Worker threads (0 keeps the OpenMP default)");
    app.add_flag("--deterministic,!--no-deterministic", g.deterministic,
                 "Fixed reduction order (default on)");
    std::string out_dir = ".";
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen", "Generate random instances");
    c_gen->add_option("--kind", gen.kind, "exact_cover | tsp | garden")->capture_default_str();
    c_gen->add_option("-n,--n-vars", gen.n, "Variables (exact_cover, garden)")->capture_default_str();
    c_gen->add_option("--cities", gen.cities, "Cities (tsp)")->capture_default_str();
    c_gen->add_option("--species", gen.species, "Species (garden)")->capture_default_str();
    c_gen->add_option("--count", gen.count, "Instances, seeded seed..seed+count-1")->capture_default_str();
    c_gen->add_flag("--no-rescale", gen.no_rescale, "Keep raw energies");

    SpectrumArgs spec;
    auto* c_spec = app.add_subcommand("spectrum", "Enumerate the spectrum and gap profile");
    c_spec->add_option("instance", spec.instance)->required()->check(CLI::ExistingFile);
    c_spec->add_flag("--profile", spec.profile, "Also write the gap profile and fit");
    c_spec->add_option("--bins", spec.bins)->capture_default_str();
    c_spec->add_option("--degree", spec.degree)->capture_default_str();
    c_spec->add_flag("--no-rescale", spec.no_rescale);

    EvolveArgs ev;
    auto* c_ev = app.add_subcommand("evolve", "Run one evolution");
    c_ev->add_option("instance", ev.instance)->required()->check(CLI::ExistingFile);
    c_ev->add_option("--schedule", ev.schedule, "qa | constant | gqw | oracle | descriptor.json")
        ->capture_default_str();
    c_ev->add_option("-T,--total-time", ev.t)->capture_default_str()->check(CLI::PositiveNumber);
    c_ev->add_option("--gamma", ev.gamma, "Constant rate (default: search optimum)");
    c_ev->add_option("--params", ev.params, "lambda0 lambda1 lambda2 lambda3 k_start k_end")->expected(6);
    c_ev->add_flag("--record", ev.record, "Write the trace CSV");
    c_ev->add_option("--stride", ev.stride, "Steps between trace samples (0 = auto)");
    c_ev->add_option("--bins", ev.bins, "Energy bins in the trace")->capture_default_str();
    c_ev->add_flag("--dump", ev.dump, "Write the final state");
    c_ev->add_flag("--convergence-check", ev.convergence_check, "Rerun at dt/2 and report the S_q delta");
    c_ev->add_flag("--no-rescale", ev.no_rescale);

    OptimizeArgs op;
    auto* c_op = app.add_subcommand("optimize", "Tune a schedule");
    c_op->add_option("instance", op.instance)->required()->check(CLI::ExistingFile);
    c_op->add_option("--algorithm", op.algorithm, "gqw | qw")
        ->capture_default_str()
        ->check(CLI::IsMember({"gqw", "qw"}));
    c_op->add_option("-T,--total-time", op.t)->capture_default_str()->check(CLI::PositiveNumber);
    c_op->add_option("--restarts", op.restarts)->capture_default_str()->check(CLI::PositiveNumber);
    c_op->add_option("--evals", op.evals, "Evaluations per restart")->capture_default_str();
    c_op->add_option("--shots", op.shots, "Sampled objective (0 = exact)")->capture_default_str();
    c_op->add_flag("--no-rescale", op.no_rescale);

    PlanArgs pl;
    auto* c_plan = app.add_subcommand("plan", "Experiment plans");
    c_plan->require_subcommand(1);
    auto* c_run = c_plan->add_subcommand("run", "Run (or resume) a plan");
    c_run->add_option("plan", pl.plan)->required()->check(CLI::ExistingFile);

    ExportArgs ex;
    auto* c_ex = app.add_subcommand("export", "Figure data from a report");
    c_ex->add_option("report", ex.report)->required()->check(CLI::ExistingFile);
    c_ex->add_option("--figure", ex.figure)
        ->capture_default_str()
        ->check(CLI::IsMember({"sq_vs_t", "t_vs_n", "tts_vs_n", "evolution_traces"}));
    c_ex->add_option("--traces", ex.traces, "Trace directory (default: <report dir>/traces)");
    c_ex->add_option("--thresholds", ex.thresholds, "S_q thresholds for t_vs_n");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    g.out = out_dir;
    if (g.threads > 0) gqw::kernels::set_threads(g.threads);

    try {
        if (*c_gen || *c_spec || *c_ev || *c_op || *c_ex) fs::create_directories(g.out);
        if (*c_gen) return cmd_gen(g, gen);
        if (*c_spec) return cmd_spectrum(g, spec);
        if (*c_ev) return cmd_evolve(g, ev);
        if (*c_op) return cmd_optimize(g, op);
        if (*c_run) return cmd_plan_run(g, pl, out_opt->count() > 0, seed_opt->count() > 0, dt_opt->count() > 0);
        if (*c_ex) return cmd_export(g, ex);
    } catch (const gqw::NumericalAbort& e) {
        spdlog::error("numerical abort: {}", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitInvalid;
    }
    return 0;
}
