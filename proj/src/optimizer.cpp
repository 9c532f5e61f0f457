#include "gqw/optimizer.hpp"

#include "gqw/kernels.hpp"
#include "gqw/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace gqw {

std::vector<double> Box::clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

struct BudgetExhausted {};
struct NonFinite {};

}  // namespace

NelderMeadResult nelder_mead(const Objective& objective, std::vector<double> x0, const Box& box,
                             const NelderMeadOptions& options) {
    const std::size_t n = box.dim();
    if (n == 0 || box.hi.size() != n || x0.size() != n) {
        throw std::invalid_argument("nelder_mead: dimension mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(box.lo[i] <= box.hi[i])) throw std::invalid_argument("nelder_mead: empty box");
    }
    if (options.max_evals < 1) throw std::invalid_argument("nelder_mead: budget must be positive");

    NelderMeadResult result;
    result.f = std::numeric_limits<double>::infinity();

    auto eval = [&](std::vector<double> x) -> Vertex {
        if (result.evals >= options.max_evals) throw BudgetExhausted{};
        x = box.clamp(std::move(x));
        const double f = objective(x);
        ++result.evals;
        result.history.push_back(f);
        if (!std::isfinite(f)) throw NonFinite{};
        if (f < result.f) {
            result.f = f;
            result.x = x;
        }
        return {std::move(x), f};
    };

    std::vector<Vertex> simplex;
    try {
        simplex.push_back(eval(x0));
        for (std::size_t i = 0; i < n; ++i) {
            auto x = box.clamp(x0);
            const double step = options.initial_step * (box.hi[i] - box.lo[i]);
            x[i] = x[i] + step <= box.hi[i] ? x[i] + step : x[i] - step;
            simplex.push_back(eval(std::move(x)));
        }

        auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
        auto combine = [&](const std::vector<double>& c, const std::vector<double>& p, double coef) {
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + coef * (p[i] - c[i]);
            return out;
        };

        while (true) {
            std::stable_sort(simplex.begin(), simplex.end(), by_f);
            const double spread = simplex.back().f - simplex.front().f;
            if (spread <= options.tolerance) {
                result.converged = true;
                break;
            }
            std::vector<double> centroid(n, 0.0);
            for (std::size_t v = 0; v < n; ++v) {
                for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i];
            }
            for (auto& c : centroid) c /= static_cast<double>(n);

            auto& worst = simplex.back();
            const double f_best = simplex.front().f;
            const double f_second = simplex[n - 1].f;

            auto reflected = eval(combine(centroid, worst.x, -options.reflect));
            if (reflected.f < f_best) {
                auto expanded = eval(combine(centroid, reflected.x, options.expand));
                worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
                continue;
            }
            if (reflected.f < f_second) {
                worst = std::move(reflected);
                continue;
            }
            if (reflected.f < worst.f) {
                auto outside = eval(combine(centroid, reflected.x, options.contract));
                if (outside.f <= reflected.f) {
                    worst = std::move(outside);
                    continue;
                }
            } else {
                auto inside = eval(combine(centroid, worst.x, options.contract));
                if (inside.f < worst.f) {
                    worst = std::move(inside);
                    continue;
                }
            }
            const auto best = simplex.front().x;
            for (std::size_t v = 1; v < simplex.size(); ++v) {
                simplex[v] = eval(combine(best, simplex[v].x, options.shrink));
            }
        }
    } catch (const BudgetExhausted&) {
    } catch (const NonFinite&) {
        result.aborted = true;
        spdlog::warn("objective returned a non-finite value after {} evaluations; restart aborted",
                     result.evals);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Schedule tuning
// ---------------------------------------------------------------------------

Schedule gqw_schedule_from_vector(std::span<const double> x, double total_time,
                                  const BoundaryRanges& ranges) {
    if (x.size() != HyperParams::size) throw std::invalid_argument("GQW needs 6 parameters");
    std::array<double, HyperParams::size> a{};
    std::copy(x.begin(), x.end(), a.begin());
    return gqw_schedule(HyperParams::from_array(a), total_time, ranges);
}

Schedule qw_schedule_from_vector(std::span<const double> x, double total_time) {
    if (x.size() != 1) throw std::invalid_argument("QW needs 1 parameter");
    return constant_schedule(std::pow(10.0, x[0]), total_time);
}

namespace {

using ScheduleFactory = std::function<Schedule(std::span<const double>)>;

double sampled_energy(const Statevector& state, const SpectrumTable& spectrum, std::size_t shots,
                      std::uint64_t seed) {
    std::vector<double> cdf(state.dim());
    double acc = 0.0;
    for (std::size_t z = 0; z < cdf.size(); ++z) {
        acc += std::norm(state[z]);
        cdf[z] = acc;
    }
    Rng rng(seed);
    double sum = 0.0;
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform01() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto z = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        sum += spectrum.energies[z];
    }
    return sum / static_cast<double>(shots);
}

struct RestartRun {
    RestartSummary summary;
    RunRecord best_record;
    double best_f = std::numeric_limits<double>::infinity();
};

RestartRun run_restart(const SpectrumTable& spectrum, double total_time,
                       const OptimizerConfig& config, const Box& box,
                       const ScheduleFactory& factory, std::uint64_t seed) {
    RestartRun run;
    run.summary.seed = seed;
    Rng rng(seed);
    std::vector<double> x0(box.dim());
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = rng.uniform(box.lo[i], box.hi[i]);
    run.summary.x0 = x0;

    EvolutionConfig ecfg;
    ecfg.total_time = total_time;
    ecfg.dt = std::min(config.dt, total_time);
    ecfg.deterministic = config.deterministic;

    std::uint64_t eval_index = 0;
    auto objective = [&](std::span<const double> x) {
        auto result = evolve(spectrum, factory(x), ecfg);
        run.summary.max_norm_error = std::max(run.summary.max_norm_error, result.record.norm_error);
        double f = result.record.e_psi;
        if (config.shots > 0) {
            f = sampled_energy(result.state, spectrum, config.shots, derive_seed(seed, eval_index));
        }
        ++eval_index;
        if (f < run.best_f) {
            run.best_f = f;
            run.best_record = std::move(result.record);
        }
        return f;
    };

    NelderMeadOptions nm;
    nm.max_evals = config.max_evals;
    nm.initial_step = config.initial_step;
    nm.tolerance = config.tolerance;
    auto res = nelder_mead(objective, x0, box, nm);
    run.summary.best_x = res.x;
    run.summary.best_f = res.f;
    run.summary.evals = res.evals;
    run.summary.history = std::move(res.history);
    run.summary.aborted = res.aborted;
    return run;
}

OptimizationOutcome optimize(const SpectrumTable& spectrum, double total_time,
                             const OptimizerConfig& config, const Box& box,
                             const ScheduleFactory& factory, std::string algorithm) {
    if (config.n_restarts < 1) throw std::invalid_argument("at least one restart is required");
    if (!(total_time > 0.0)) throw std::invalid_argument("optimization needs T > 0");

    const auto restarts = static_cast<std::int64_t>(config.n_restarts);
    std::vector<RestartRun> runs(config.n_restarts);
    std::vector<std::exception_ptr> errors(config.n_restarts);
    const bool parallel = config.parallel_restarts && restarts > 1 && kernels::max_threads() > 1;

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::int64_t r = 0; r < restarts; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        try {
            runs[idx] = run_restart(spectrum, total_time, config, box, factory,
                                    derive_seed(config.seed, idx));
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    OptimizationOutcome out;
    out.algorithm = std::move(algorithm);
    out.total_time = total_time;
    out.best_energy = std::numeric_limits<double>::infinity();
    for (auto& run : runs) {
        out.evals += run.summary.evals;
        out.max_norm_error = std::max(out.max_norm_error, run.summary.max_norm_error);
        if (run.best_f < out.best_energy) {
            out.best_energy = run.best_f;
            out.best_params = run.summary.best_x;
            out.best_record = run.best_record;
        }
        out.restarts.push_back(std::move(run.summary));
    }
    if (out.best_params.empty()) throw std::runtime_error("every restart aborted");
    out.best_sq = out.best_record.s_q;
    return out;
}

}  // namespace

OptimizationOutcome optimize_gqw(const SpectrumTable& spectrum, double total_time,
                                 const OptimizerConfig& config) {
    const double m = config.control_margin;
    Box box{{m, m, m, m, 0.0, 0.0}, {1 - m, 1 - m, 1 - m, 1 - m, 1.0, 1.0}};
    const auto ranges = config.ranges;
    return optimize(spectrum, total_time, config, box,
                    [&](std::span<const double> x) {
                        return gqw_schedule_from_vector(x, total_time, ranges);
                    },
                    "gqw");
}

OptimizationOutcome optimize_qw(const SpectrumTable& spectrum, double total_time,
                                const OptimizerConfig& config) {
    Box box{{config.qw_log_lo}, {config.qw_log_hi}};
    return optimize(spectrum, total_time, config, box,
                    [&](std::span<const double> x) { return qw_schedule_from_vector(x, total_time); },
                    "qw");
}

nlohmann::json to_json(const OptimizationOutcome& outcome) {
    nlohmann::json restarts = nlohmann::json::array();
    for (const auto& r : outcome.restarts) {
        restarts.push_back({{"seed", r.seed},
                            {"best_f", r.best_f},
                            {"history_len", r.history.size()},
                            {"aborted", r.aborted}});
    }
    return {{"algorithm", outcome.algorithm},
            {"T", outcome.total_time},
            {"best_params", outcome.best_params},
            {"best_energy", outcome.best_energy},
            {"best_sq", outcome.best_sq},
            {"best_p_gs", outcome.best_record.p_gs},
            {"schedule", nlohmann::json::parse(outcome.best_record.schedule)},
            {"evals", outcome.evals},
            {"max_norm_error", outcome.max_norm_error},
            {"restarts", restarts}};
}

}  // namespace gqw
