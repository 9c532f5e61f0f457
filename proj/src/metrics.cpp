#include "gqw/metrics.hpp"

#include "gqw/engine.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <cmath>

namespace gqw {

namespace {

void check_sizes(std::span<const double> probabilities, const SpectrumTable& spectrum) {
    if (probabilities.size() != spectrum.energies.size()) {
        throw MetricError("probability vector does not match the spectrum size");
    }
}

}  // namespace

double ground_state_probability(std::span<const double> probabilities,
                                const SpectrumTable& spectrum) {
    check_sizes(probabilities, spectrum);
    double p = 0.0;
    for (auto z : spectrum.ground_states) p += probabilities[z];
    return p;
}

double solution_quality(std::span<const double> probabilities, const SpectrumTable& spectrum) {
    check_sizes(probabilities, spectrum);
    if (spectrum.valid_count == 0) {
        spdlog::warn("solution quality of a spectrum without valid states is 0");
        return 0.0;
    }
    if (spectrum.constraint_only) return ground_state_probability(probabilities, spectrum);

    const double e_top = spectrum.e_max_valid;
    // One valid energy level: every valid state counts fully.
    double e_low = e_top;
    for (std::size_t z = 0; z < probabilities.size(); ++z) {
        if (spectrum.valid[z]) e_low = std::min(e_low, spectrum.energies[z]);
    }
    const bool degenerate = !(e_top > e_low) || !(e_top > 0.0);
    double sq = 0.0;
    for (std::size_t z = 0; z < probabilities.size(); ++z) {
        if (!spectrum.valid[z]) continue;
        const double r_valid = degenerate ? 0.0 : spectrum.energies[z] / e_top;
        sq += (1.0 - r_valid) * probabilities[z];
    }
    return sq;
}

double solution_quality(const Statevector& state, const SpectrumTable& spectrum) {
    return solution_quality(state.probabilities(), spectrum);
}

double approximation_ratio(std::span<const double> probabilities, const SpectrumTable& spectrum) {
    check_sizes(probabilities, spectrum);
    if (spectrum.flat || !(spectrum.e_max > 0.0)) {
        throw MetricError("approximation ratio undefined for a flat or non-positive spectrum");
    }
    double e = 0.0;
    for (std::size_t z = 0; z < probabilities.size(); ++z) e += probabilities[z] * spectrum.energies[z];
    return e / spectrum.e_max;
}

double approximation_ratio(const Statevector& state, const SpectrumTable& spectrum) {
    return approximation_ratio(state.probabilities(), spectrum);
}

MetricReport metric_report(std::span<const double> probabilities, const SpectrumTable& spectrum) {
    check_sizes(probabilities, spectrum);
    MetricReport report;
    for (std::size_t z = 0; z < probabilities.size(); ++z) {
        report.e_psi += probabilities[z] * spectrum.energies[z];
        if (spectrum.valid[z]) report.valid_mass += probabilities[z];
    }
    report.p_gs = ground_state_probability(probabilities, spectrum);
    report.s_q = solution_quality(probabilities, spectrum);
    report.r = (!spectrum.flat && spectrum.e_max > 0.0) ? report.e_psi / spectrum.e_max : 0.0;
    return report;
}

double time_to_solution(double p_gs, double total_time, double n_opt, double p_target) {
    if (!(p_gs > 0.0)) throw MetricError("unreachable target: success probability is zero");
    if (!(p_target > 0.0 && p_target < 1.0)) throw MetricError("target probability must be in (0, 1)");
    const double repetitions =
        p_gs >= p_target ? 1.0 : std::log1p(-p_target) / std::log1p(-p_gs);
    return repetitions * total_time + n_opt * total_time;
}

GeometricStats geometric_aggregate(std::span<const double> values, double floor) {
    if (values.empty()) throw MetricError("geometric aggregate of an empty set");
    GeometricStats stats;
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) {
        if (!(v > floor)) {
            if (!(v > 0.0)) ++stats.floored;
            v = std::max(v, floor);
            if (!(v > 0.0) || std::isnan(v)) v = floor;
        }
        logs.push_back(std::log(v));
    }
    if (stats.floored > 0) {
        spdlog::warn("geometric aggregate: {} non-positive value(s) floored at {}", stats.floored,
                     floor);
    }
    double mean = 0.0;
    for (double l : logs) mean += l;
    mean /= static_cast<double>(logs.size());
    double var = 0.0;
    for (double l : logs) var += (l - mean) * (l - mean);
    var /= static_cast<double>(logs.size());
    stats.mean = std::exp(mean);
    stats.stddev = std::exp(std::sqrt(var));
    return stats;
}

double ScalingFit::predict(double n) const {
    return model == ScalingModel::linear ? a + b * n : a * std::exp2(b * n);
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points, ScalingModel model) {
    if (points.size() < 3) throw MetricError("scaling fit needs at least 3 points");
    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& p = points[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = p.n;
        if (model == ScalingModel::exponential) {
            if (!(p.t > 0.0)) throw MetricError("exponential fit needs positive times");
            rhs(i) = std::log2(p.t);
        } else {
            rhs(i) = p.t;
        }
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd resid = design * coef - rhs;
    ScalingFit fit;
    fit.model = model;
    fit.a = model == ScalingModel::linear ? coef(0) : std::exp2(coef(0));
    fit.b = coef(1);
    fit.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
    return fit;
}

std::optional<double> threshold_crossing(std::span<const double> times,
                                         std::span<const double> values, double threshold) {
    if (times.size() != values.size()) throw MetricError("times and values differ in length");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (values[i] < threshold) continue;
        if (i == 0) return times[0];
        const double v0 = values[i - 1];
        const double v1 = values[i];
        const double w = (threshold - v0) / (v1 - v0);
        return times[i - 1] + w * (times[i] - times[i - 1]);
    }
    return std::nullopt;
}

}  // namespace gqw
