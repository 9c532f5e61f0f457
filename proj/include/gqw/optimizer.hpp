#pragma once

// Bounded Nelder-Mead and the restart loops that tune GQW and QW schedules
// against the final energy expectation.

#include "gqw/engine.hpp"
#include "gqw/problems.hpp"
#include "gqw/schedules.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gqw {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    std::vector<double> clamp(std::vector<double> x) const;
};

struct NelderMeadOptions {
    std::size_t max_evals = 100;
    /// Initial simplex edge as a fraction of each box width.
    double initial_step = 0.1;
    /// Stop once max_i |f_i - f_best| over the simplex falls to this value.
    double tolerance = 1e-8;
    double reflect = 1.0;
    double expand = 2.0;
    double contract = 0.5;
    double shrink = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evals = 0;
    /// Objective value of every evaluation, in order.
    std::vector<double> history;
    bool converged = false;
    /// Set when the objective returned a non-finite value.
    bool aborted = false;
};

using Objective = std::function<double(std::span<const double>)>;

NelderMeadResult nelder_mead(const Objective& objective, std::vector<double> x0, const Box& box,
                             const NelderMeadOptions& options);

struct OptimizerConfig {
    std::size_t n_restarts = 20;       // N_rep
    std::size_t max_evals = 100;       // N_opt per restart
    std::uint64_t seed = 0;
    double initial_step = 0.1;
    double tolerance = 1e-8;
    double dt = 1e-3;
    bool deterministic = true;
    /// 0 uses the exact energy expectation; otherwise a seeded estimate from this many samples.
    std::size_t shots = 0;
    /// Run restarts concurrently when more than one thread is available.
    bool parallel_restarts = true;
    BoundaryRanges ranges;
    /// Box for the Bezier controls, inside the open unit interval.
    double control_margin = 1e-3;
    /// log10 search range of the QW hopping rate.
    double qw_log_lo = -3.0;
    double qw_log_hi = 2.0;
};

struct RestartSummary {
    std::uint64_t seed = 0;
    std::vector<double> x0;
    std::vector<double> best_x;
    double best_f = 0.0;
    std::size_t evals = 0;
    std::vector<double> history;
    bool aborted = false;
    double max_norm_error = 0.0;
};

struct OptimizationOutcome {
    std::string algorithm;  // "gqw" or "qw"
    double total_time = 0.0;
    std::vector<double> best_params;
    double best_energy = 0.0;
    double best_sq = 0.0;
    RunRecord best_record;
    std::size_t evals = 0;
    /// Largest norm drift seen in any evaluation.
    double max_norm_error = 0.0;
    std::vector<RestartSummary> restarts;
};

/// Six parameters (lambda0..lambda3, k_start, k_end).
OptimizationOutcome optimize_gqw(const SpectrumTable& spectrum, double total_time,
                                 const OptimizerConfig& config);
/// One parameter, log10 Gamma.
OptimizationOutcome optimize_qw(const SpectrumTable& spectrum, double total_time,
                                const OptimizerConfig& config);

Schedule gqw_schedule_from_vector(std::span<const double> x, double total_time,
                                  const BoundaryRanges& ranges);
Schedule qw_schedule_from_vector(std::span<const double> x, double total_time);

nlohmann::json to_json(const OptimizationOutcome& outcome);

}  // namespace gqw
