#include "gqw/spectral.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gqw {

std::size_t GapBins::nonempty() const {
    return static_cast<std::size_t>(
        std::count_if(count.begin(), count.end(), [](std::size_t c) { return c > 0; }));
}

double PolynomialFit::operator()(double energy) const {
    const double span = e_max - e_min;
    const double x = span > 0.0 ? (energy - e_min) / span : 0.0;
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<GapSample> largest_lower_gaps(const SpectrumTable& spectrum) {
    const auto dim = spectrum.energies.size();
    const auto n = spectrum.n_vars;
    std::vector<double> gaps(dim, 0.0);
    const auto& e = spectrum.energies;
    // Degenerate neighbours differ only by rounding noise; they are not lower.
    const double tol = 1e-9 * std::max(1.0, spectrum.e_max - spectrum.e_min);

#pragma omp parallel for schedule(static) if (dim >= (1u << 14))
    for (std::int64_t zi = 0; zi < static_cast<std::int64_t>(dim); ++zi) {
        const auto z = static_cast<std::uint64_t>(zi);
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double drop = e[z] - e[z ^ (std::uint64_t{1} << j)];
            if (drop > tol && drop > best) best = drop;
        }
        gaps[z] = best;
    }

    std::vector<GapSample> samples;
    for (std::size_t z = 0; z < dim; ++z) {
        if (gaps[z] > 0.0) samples.push_back({e[z], gaps[z]});
    }
    return samples;
}

GapBins mean_gap_profile(std::span<const GapSample> samples, double e_min, double e_max,
                         std::size_t bin_count) {
    if (samples.empty()) throw SpectralError("gap profile needs at least one sample");
    if (bin_count == 0) throw SpectralError("bin count must be positive");
    if (!(e_max > e_min)) throw SpectralError("gap profile needs e_max > e_min");

    GapBins bins;
    bins.e_min = e_min;
    bins.e_max = e_max;
    bins.centers.resize(bin_count);
    bins.mean.assign(bin_count, 0.0);
    bins.count.assign(bin_count, 0);
    bins.interpolated.assign(bin_count, 0);

    const double width = (e_max - e_min) / static_cast<double>(bin_count);
    for (std::size_t b = 0; b < bin_count; ++b) {
        bins.centers[b] = e_min + (static_cast<double>(b) + 0.5) * width;
    }
    for (const auto& s : samples) {
        auto b = static_cast<std::int64_t>(std::floor((s.energy - e_min) / width));
        b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bin_count) - 1);
        bins.mean[static_cast<std::size_t>(b)] += s.gap;
        ++bins.count[static_cast<std::size_t>(b)];
    }

    std::vector<std::size_t> filled;
    for (std::size_t b = 0; b < bin_count; ++b) {
        if (bins.count[b] > 0) {
            bins.mean[b] /= static_cast<double>(bins.count[b]);
            filled.push_back(b);
        }
    }
    std::size_t next = 0;  // index into `filled` of the first non-empty bin at or above b
    for (std::size_t b = 0; b < bin_count; ++b) {
        if (bins.count[b] > 0) {
            ++next;
            continue;
        }
        bins.interpolated[b] = 1;
        if (next == 0) {
            bins.mean[b] = bins.mean[filled.front()];
        } else if (next == filled.size()) {
            bins.mean[b] = bins.mean[filled.back()];
        } else {
            const auto lo = filled[next - 1];
            const auto hi = filled[next];
            const double w = static_cast<double>(b - lo) / static_cast<double>(hi - lo);
            bins.mean[b] = (1.0 - w) * bins.mean[lo] + w * bins.mean[hi];
        }
    }
    return bins;
}

PolynomialFit fit_profile(const GapBins& bins, std::size_t degree) {
    std::vector<std::size_t> used;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins.count[b] > 0) used.push_back(b);
    }
    if (used.size() < degree + 1) {
        throw SpectralError("fit of degree " + std::to_string(degree) + " needs at least " +
                            std::to_string(degree + 1) + " non-empty bins, got " +
                            std::to_string(used.size()));
    }

    PolynomialFit fit;
    fit.degree = degree;
    fit.e_min = bins.e_min;
    fit.e_max = bins.e_max;

    const auto rows = static_cast<Eigen::Index>(used.size());
    const auto cols = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd rhs(rows);
    const double span = bins.e_max - bins.e_min;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto b = used[static_cast<std::size_t>(r)];
        const double x = (bins.centers[b] - bins.e_min) / span;
        double p = 1.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            design(r, c) = p;
            p *= x;
        }
        rhs(r) = bins.mean[b];
    }
    const auto qr = design.colPivHouseholderQr();
    if (qr.rank() < cols) throw SpectralError("rank-deficient gap-profile fit");
    const Eigen::VectorXd coef = qr.solve(rhs);
    fit.coefficients.assign(coef.data(), coef.data() + coef.size());
    fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(rows));
    return fit;
}

GapProfile analyze_gaps(const SpectrumTable& spectrum, std::size_t bin_count, std::size_t degree) {
    GapProfile profile;
    profile.e_min = spectrum.e_min;
    profile.e_max = spectrum.e_max;
    profile.samples = largest_lower_gaps(spectrum);
    profile.bins = mean_gap_profile(profile.samples, spectrum.e_min, spectrum.e_max, bin_count);
    profile.fit = fit_profile(profile.bins, degree);
    return profile;
}

double rabi_probability(double gamma, double delta, double t) {
    const double w2 = gamma * gamma + delta * delta;
    if (!(w2 > 0.0)) throw SpectralError("Rabi frequency undefined for gamma = delta = 0");
    const double s = std::sin(std::sqrt(w2) * t);
    return 0.5 + gamma * delta / w2 * s * s;
}

double resonance_gamma(double cost_gap) {
    if (cost_gap < 0.0) throw SpectralError("cost gap must be non-negative");
    return cost_gap / 4.0;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw SpectralError("spearman: length mismatch");
    if (a.size() < 2) throw SpectralError("spearman: need at least two points");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double profile_trend(const GapBins& bins) {
    std::vector<double> x, y;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins.count[b] == 0) continue;
        x.push_back(bins.centers[b]);
        y.push_back(bins.mean[b]);
    }
    return spearman(x, y);
}

}  // namespace gqw
