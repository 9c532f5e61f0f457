#pragma once

// Benchmark metrics: solution quality, approximation ratio, time-to-solution,
// cross-instance aggregation and scaling fits.

#include "gqw/problems.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gqw {

class Statevector;

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MetricReport {
    double p_gs = 0.0;
    double e_psi = 0.0;
    double s_q = 0.0;
    double r = 0.0;
    double valid_mass = 0.0;
};

/// Sum over valid z of (1 - E_z / E_max_valid) P_z. Constraint-only spectra use the
/// ground-state probability; a single valid energy level gives every valid state r = 0.
double solution_quality(std::span<const double> probabilities, const SpectrumTable& spectrum);
double solution_quality(const Statevector& state, const SpectrumTable& spectrum);

double ground_state_probability(std::span<const double> probabilities,
                                const SpectrumTable& spectrum);

/// E_psi / E_max. Throws on a flat or non-positive spectrum.
double approximation_ratio(std::span<const double> probabilities, const SpectrumTable& spectrum);
double approximation_ratio(const Statevector& state, const SpectrumTable& spectrum);

MetricReport metric_report(std::span<const double> probabilities, const SpectrumTable& spectrum);

constexpr double kDefaultTargetProbability = 0.9999;

/// ln(1 - p_target) / ln(1 - p_gs) * T + n_opt * T, with the repetition factor
/// floored at one run once p_gs >= p_target.
double time_to_solution(double p_gs, double total_time, double n_opt,
                        double p_target = kDefaultTargetProbability);

struct GeometricStats {
    double mean = 0.0;
    double stddev = 1.0;  // multiplicative
    std::size_t floored = 0;
};

/// exp(mean(log v)), exp(std(log v)) with population std; values <= 0 are floored at 1e-12.
GeometricStats geometric_aggregate(std::span<const double> values, double floor = 1e-12);

enum class ScalingModel { linear, exponential };

struct ScalingFit {
    ScalingModel model = ScalingModel::linear;
    double a = 0.0;
    double b = 0.0;
    /// RMS residual in the fitted space (log2 T for the exponential model).
    double residual = 0.0;

    double predict(double n) const;
};

struct ScalingPoint {
    double n = 0.0;
    double t = 0.0;
};

/// Least squares for a + b N, or a * 2^(b N) fitted on log2 T.
ScalingFit fit_scaling(std::span<const ScalingPoint> points, ScalingModel model);

/// First time at which the sampled curve reaches `threshold`, interpolated linearly
/// between the adjacent samples. Empty when the curve never reaches it.
std::optional<double> threshold_crossing(std::span<const double> times,
                                         std::span<const double> values, double threshold);

}  // namespace gqw
