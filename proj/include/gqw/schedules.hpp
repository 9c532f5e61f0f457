#pragma once

// Hopping-rate schedules Gamma(t) on [0, T].

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gqw {

struct GapProfile;

class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape controls (lambda0..lambda3) and boundary exponents of the Bezier schedule.
struct HyperParams {
    double x1 = 0.5;  // lambda0
    double y1 = 0.5;  // lambda1
    double x2 = 0.5;  // lambda2
    double y2 = 0.5;  // lambda3
    double k_start = 1.0;
    double k_end = 0.0;

    static constexpr std::size_t size = 6;
    std::array<double, size> to_array() const { return {x1, y1, x2, y2, k_start, k_end}; }
    static HyperParams from_array(const std::array<double, size>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
};

/// log10 ranges of the boundary hopping rates; k = 0 maps to `lo`, k = 1 to `hi`.
struct BoundaryRanges {
    double start_lo = 0.0;  // Gamma(0) in [1, 100]
    double start_hi = 2.0;
    double end_lo = -3.0;   // Gamma(T) in [1e-3, 1]
    double end_hi = 0.0;
};

/// Monotone cubic Bezier through (0,1), (x1,y1), (x2,y2), (1,0), read as y(u).
class BezierCurve {
public:
    BezierCurve(double x1, double y1, double x2, double y2);

    /// y at abscissa u in [0, 1].
    double operator()(double u) const;
    /// Running minimum of y over [0, u]; non-increasing in u.
    double running_min(double u) const;

    double x_at(double tau) const;
    double y_at(double tau) const;
    /// Curve parameter with x(tau) = u, by bisection.
    double invert(double u) const;

private:
    std::array<double, 4> x_;
    std::array<double, 4> y_;
    std::vector<double> y_critical_;  // interior tau with y'(tau) = 0
};

/// y(u) for the curve with controls (lambda0, lambda1), (lambda2, lambda3).
double bezier_eval(double lambda0, double lambda1, double lambda2, double lambda3, double u);

struct ConstantRate {
    double gamma = 0.0;
};

struct LinearQa {
    double cap = 1e4;
};

struct BezierGqw {
    HyperParams params;
    BoundaryRanges ranges;
    double gamma_start = 1.0;
    double gamma_end = 1.0;
};

struct SpectralOracle {
    std::vector<double> fit;  // polynomial in (E - e_min) / (e_max - e_min)
    double e_min = 0.0;
    double e_max = 1.0;
    double floor = 1e-6;
    /// Clamped fit on a uniform energy grid from e_min (index 0) to e_max.
    std::vector<double> gap_table;
    /// Trapezoidal integral of gap_table from e_min.
    std::vector<double> cumulative;
    /// Gamma on the same grid, made non-decreasing in energy.
    std::vector<double> gamma_table;
};

class Schedule {
public:
    using Variant = std::variant<ConstantRate, LinearQa, BezierGqw, SpectralOracle>;

    Schedule(Variant v, double total_time);

    double gamma(double t) const;
    double total_time() const { return total_time_; }
    std::string variant_name() const;
    const Variant& variant() const { return variant_; }

    /// Rescaled progress s(t) for the spectral oracle; t / T otherwise.
    double progress(double t) const;

    nlohmann::json to_json() const;
    static Schedule from_json(const nlohmann::json& j);

private:
    Variant variant_;
    double total_time_;
    std::optional<BezierCurve> curve_;
};

Schedule constant_schedule(double gamma, double total_time);
Schedule linear_qa_schedule(double total_time, double cap = 1e4);
Schedule gqw_schedule(const HyperParams& params, double total_time,
                      const BoundaryRanges& ranges = {});
Schedule spectral_oracle_schedule(const GapProfile& profile, double total_time,
                                  std::size_t table_size = 4097);

/// Optimal constant hopping rate of the hypercube search walk.
double search_optimal_gamma(unsigned n_qubits);

}  // namespace gqw
