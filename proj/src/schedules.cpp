#include "gqw/schedules.hpp"

#include "gqw/spectral.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace gqw {

using json = nlohmann::json;

namespace {

double bernstein(const std::array<double, 4>& c, double tau) {
    const double s = 1.0 - tau;
    return s * s * s * c[0] + 3.0 * s * s * tau * c[1] + 3.0 * s * tau * tau * c[2] +
           tau * tau * tau * c[3];
}

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double unit_progress(double t, double total_time) {
    if (!(total_time > 0.0)) return 0.0;
    return std::clamp(t / total_time, 0.0, 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bezier curve
// ---------------------------------------------------------------------------

BezierCurve::BezierCurve(double x1, double y1, double x2, double y2) {
    if (!in_unit(x1) || !in_unit(y1) || !in_unit(x2) || !in_unit(y2)) {
        throw ScheduleError("Bezier control points must lie in [0, 1]");
    }
    if (x1 > x2) std::swap(x1, x2);
    x_ = {0.0, x1, x2, 1.0};
    y_ = {1.0, y1, y2, 0.0};

    // y'(tau) / 3 = a tau^2 + b tau + c with the control-point differences below.
    const double d0 = y_[1] - y_[0];
    const double d1 = y_[2] - y_[1];
    const double d2 = y_[3] - y_[2];
    const double a = d0 - 2.0 * d1 + d2;
    const double b = 2.0 * (d1 - d0);
    const double c = d0;
    auto keep = [&](double tau) {
        if (tau > 0.0 && tau < 1.0) y_critical_.push_back(tau);
    };
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) > 1e-14) keep(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (b + std::copysign(sq, b));
            if (q != 0.0) {
                keep(q / a);
                keep(c / q);
            } else {
                keep(0.0);
            }
        }
    }
    std::sort(y_critical_.begin(), y_critical_.end());
}

double BezierCurve::x_at(double tau) const { return bernstein(x_, tau); }
double BezierCurve::y_at(double tau) const { return bernstein(y_, tau); }

double BezierCurve::invert(double u) const {
    if (!std::isfinite(u)) throw ScheduleError("Bezier inversion of a non-finite abscissa");
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (x_at(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double tau = 0.5 * (lo + hi);
    if (!(std::abs(x_at(tau) - u) <= 1e-9)) {
        throw ScheduleError("Bezier inversion did not converge; malformed controls");
    }
    return tau;
}

double BezierCurve::operator()(double u) const { return y_at(invert(u)); }

double BezierCurve::running_min(double u) const {
    const double tau = invert(u);
    double y = std::min(1.0, y_at(tau));
    for (double c : y_critical_) {
        if (c >= tau) break;
        y = std::min(y, y_at(c));
    }
    return y;
}

double bezier_eval(double lambda0, double lambda1, double lambda2, double lambda3, double u) {
    return BezierCurve(lambda0, lambda1, lambda2, lambda3)(u);
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

namespace {

double table_lookup(const std::vector<double>& table, double e_min, double e_max, double energy,
                    std::size_t* cell = nullptr, double* frac = nullptr) {
    const auto cells = table.size() - 1;
    const double pos =
        std::clamp((energy - e_min) / (e_max - e_min), 0.0, 1.0) * static_cast<double>(cells);
    auto i = static_cast<std::size_t>(pos);
    if (i >= cells) i = cells - 1;
    const double w = pos - static_cast<double>(i);
    if (cell) *cell = i;
    if (frac) *frac = w;
    return (1.0 - w) * table[i] + w * table[i + 1];
}

/// Integral of the gap from e_min to `energy`, trapezoidal inside the table cell.
double cumulative_at(const SpectralOracle& o, double energy) {
    std::size_t i = 0;
    double w = 0.0;
    const double g = table_lookup(o.gap_table, o.e_min, o.e_max, energy, &i, &w);
    const double h = (o.e_max - o.e_min) / static_cast<double>(o.gap_table.size() - 1);
    return o.cumulative[i] + 0.5 * w * h * (o.gap_table[i] + g);
}

}  // namespace

Schedule::Schedule(Variant v, double total_time) : variant_(std::move(v)), total_time_(total_time) {
    if (!std::isfinite(total_time) || total_time < 0.0) {
        throw ScheduleError("total time must be finite and non-negative");
    }
    if (const auto* g = std::get_if<BezierGqw>(&variant_)) {
        curve_.emplace(g->params.x1, g->params.y1, g->params.x2, g->params.y2);
    }
}

std::string Schedule::variant_name() const {
    switch (variant_.index()) {
        case 0: return "constant";
        case 1: return "linear_qa";
        case 2: return "bezier_gqw";
        default: return "spectral_oracle";
    }
}

double Schedule::progress(double t) const {
    const double u = unit_progress(t, total_time_);
    const auto* o = std::get_if<SpectralOracle>(&variant_);
    if (!o) return u;
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double total = o->cumulative.back();
    const double e_lin = o->e_max + (o->e_min - o->e_max) * u;
    return (total - cumulative_at(*o, e_lin)) / total;
}

double Schedule::gamma(double t) const {
    const double u = unit_progress(t, total_time_);
    if (const auto* c = std::get_if<ConstantRate>(&variant_)) return c->gamma;
    if (const auto* q = std::get_if<LinearQa>(&variant_)) {
        if (u <= 0.0) return q->cap;
        return std::min(q->cap, (1.0 - u) / u);
    }
    if (const auto* g = std::get_if<BezierGqw>(&variant_)) {
        const double y = curve_->running_min(u);
        if (y >= 1.0) return g->gamma_start;
        if (y <= 0.0) return g->gamma_end;
        return g->gamma_end * std::pow(g->gamma_start / g->gamma_end, y);
    }
    const auto& o = std::get<SpectralOracle>(variant_);
    const double energy = o.e_max + (o.e_min - o.e_max) * progress(t);
    return table_lookup(o.gamma_table, o.e_min, o.e_max, energy);
}

json Schedule::to_json() const {
    json j;
    j["variant"] = variant_name();
    j["T"] = total_time_;
    std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantRate>) {
                j["gamma"] = v.gamma;
            } else if constexpr (std::is_same_v<V, LinearQa>) {
                j["cap"] = v.cap;
            } else if constexpr (std::is_same_v<V, BezierGqw>) {
                const auto& p = v.params;
                j["params"] = {{"lambda0", p.x1}, {"lambda1", p.y1},     {"lambda2", p.x2},
                               {"lambda3", p.y2}, {"k_start", p.k_start}, {"k_end", p.k_end}};
                j["ranges"] = {{"start", {v.ranges.start_lo, v.ranges.start_hi}},
                               {"end", {v.ranges.end_lo, v.ranges.end_hi}}};
                j["gamma_start"] = v.gamma_start;
                j["gamma_end"] = v.gamma_end;
            } else {
                j["fit"] = v.fit;
                j["domain"] = {v.e_min, v.e_max};
                j["floor"] = v.floor;
                j["gap_table"] = v.gap_table;
                j["cumulative"] = v.cumulative;
                j["gamma_table"] = v.gamma_table;
            }
        },
        variant_);
    return j;
}

Schedule Schedule::from_json(const json& j) {
    try {
        const auto name = j.at("variant").get<std::string>();
        const double total_time = j.at("T").get<double>();
        if (name == "constant") return constant_schedule(j.at("gamma").get<double>(), total_time);
        if (name == "linear_qa") return linear_qa_schedule(total_time, j.value("cap", 1e4));
        if (name == "bezier_gqw") {
            const auto& p = j.at("params");
            HyperParams hp{p.at("lambda0").get<double>(), p.at("lambda1").get<double>(),
                           p.at("lambda2").get<double>(), p.at("lambda3").get<double>(),
                           p.at("k_start").get<double>(), p.at("k_end").get<double>()};
            BoundaryRanges r;
            if (j.contains("ranges")) {
                const auto& jr = j.at("ranges");
                r.start_lo = jr.at("start").at(0).get<double>();
                r.start_hi = jr.at("start").at(1).get<double>();
                r.end_lo = jr.at("end").at(0).get<double>();
                r.end_hi = jr.at("end").at(1).get<double>();
            }
            return gqw_schedule(hp, total_time, r);
        }
        if (name == "spectral_oracle") {
            SpectralOracle o;
            o.fit = j.at("fit").get<std::vector<double>>();
            o.e_min = j.at("domain").at(0).get<double>();
            o.e_max = j.at("domain").at(1).get<double>();
            o.floor = j.value("floor", 1e-6);
            o.gap_table = j.at("gap_table").get<std::vector<double>>();
            o.cumulative = j.at("cumulative").get<std::vector<double>>();
            o.gamma_table = j.at("gamma_table").get<std::vector<double>>();
            if (o.cumulative.size() < 2 || o.cumulative.size() != o.gamma_table.size() ||
                o.cumulative.size() != o.gap_table.size() ||
                !(o.e_max > o.e_min) || !(o.cumulative.back() > 0.0)) {
                throw ScheduleError("malformed spectral-oracle table");
            }
            return Schedule(std::move(o), total_time);
        }
        throw ScheduleError("unknown schedule variant '" + name + "'");
    } catch (const json::exception& e) {
        throw ScheduleError(std::string("malformed schedule descriptor: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

Schedule constant_schedule(double gamma, double total_time) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw ScheduleError("constant rate must be >= 0");
    return Schedule(ConstantRate{gamma}, total_time);
}

Schedule linear_qa_schedule(double total_time, double cap) {
    if (!(total_time > 0.0)) throw ScheduleError("linear QA needs T > 0");
    if (!(cap > 0.0)) throw ScheduleError("linear QA cap must be positive");
    return Schedule(LinearQa{cap}, total_time);
}

Schedule gqw_schedule(const HyperParams& params, double total_time, const BoundaryRanges& ranges) {
    if (!(total_time > 0.0)) throw ScheduleError("GQW schedule needs T > 0");
    for (double v : {params.x1, params.y1, params.x2, params.y2}) {
        if (!(v > 0.0 && v < 1.0)) throw ScheduleError("Bezier controls must lie in (0, 1)");
    }
    for (double k : {params.k_start, params.k_end}) {
        if (!in_unit(k)) throw ScheduleError("boundary exponents must lie in [0, 1]");
    }
    BezierGqw g;
    g.params = params;
    g.ranges = ranges;
    g.gamma_start = std::pow(10.0, ranges.start_lo + (ranges.start_hi - ranges.start_lo) * params.k_start);
    g.gamma_end = std::pow(10.0, ranges.end_lo + (ranges.end_hi - ranges.end_lo) * params.k_end);
    if (g.gamma_start < g.gamma_end) {
        throw ScheduleError("Gamma(0) must not be smaller than Gamma(T)");
    }
    return Schedule(std::move(g), total_time);
}

Schedule spectral_oracle_schedule(const GapProfile& profile, double total_time,
                                  std::size_t table_size) {
    if (!(total_time > 0.0)) throw ScheduleError("spectral-oracle schedule needs T > 0");
    if (table_size < 2) throw ScheduleError("spectral-oracle table needs at least 2 nodes");
    if (!(profile.e_max > profile.e_min)) throw ScheduleError("flat spectrum");
    if (profile.fit.coefficients.empty()) throw ScheduleError("gap profile has no fit");

    SpectralOracle o;
    o.fit = profile.fit.coefficients;
    o.e_min = profile.e_min;
    o.e_max = profile.e_max;

    PolynomialFit fit = profile.fit;
    fit.e_min = o.e_min;
    fit.e_max = o.e_max;

    const auto cells = table_size - 1;
    const double h = (o.e_max - o.e_min) / static_cast<double>(cells);
    std::vector<double> gap(table_size);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < table_size; ++i) {
        const double e = o.e_min + static_cast<double>(i) * h;
        double g = fit(e);
        if (!(g > o.floor)) {
            ++clamped;
            g = o.floor;
        }
        gap[i] = g;
    }
    if (clamped > 0) {
        spdlog::warn("gap-profile fit is below {} at {} of {} nodes; clamped", o.floor, clamped,
                     table_size);
    }

    o.gap_table = gap;
    o.cumulative.assign(table_size, 0.0);
    for (std::size_t i = 1; i < table_size; ++i) {
        o.cumulative[i] = o.cumulative[i - 1] + 0.5 * h * (gap[i - 1] + gap[i]);
    }
    o.gamma_table.resize(table_size);
    double running = resonance_gamma(gap.back());
    for (std::size_t i = table_size; i-- > 0;) {
        running = std::min(running, resonance_gamma(gap[i]));
        o.gamma_table[i] = running;
    }
    return Schedule(std::move(o), total_time);
}

double search_optimal_gamma(unsigned n_qubits) {
    if (n_qubits == 0) throw ScheduleError("search needs at least one qubit");
    double binom = 1.0;  // C(N, r)
    double sum = 0.0;
    for (unsigned r = 1; r <= n_qubits; ++r) {
        binom = binom * static_cast<double>(n_qubits - r + 1) / static_cast<double>(r);
        sum += binom / (2.0 * r);
    }
    return std::ldexp(sum, -static_cast<int>(n_qubits));
}

}  // namespace gqw
