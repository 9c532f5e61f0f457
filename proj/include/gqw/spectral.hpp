#pragma once

// Energy-gap analysis of the cost Hamiltonian on the hypercube graph, and the
// two-level (Rabi) closed forms for local amplitude transfer.

#include "gqw/problems.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gqw {

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vertex energy and its largest drop to a lower single-flip neighbour.
struct GapSample {
    double energy = 0.0;
    double gap = 0.0;
};

struct GapBins {
    double e_min = 0.0;
    double e_max = 0.0;
    std::vector<double> centers;
    std::vector<double> mean;
    std::vector<std::size_t> count;
    /// Set for bins without samples whose mean was interpolated from neighbours.
    std::vector<std::uint8_t> interpolated;

    std::size_t size() const { return centers.size(); }
    std::size_t nonempty() const;
};

/// Least-squares polynomial in x = (E - e_min) / (e_max - e_min).
struct PolynomialFit {
    std::size_t degree = 0;
    double e_min = 0.0;
    double e_max = 1.0;
    std::vector<double> coefficients;  // ascending powers of x
    /// RMS residual over the fitted bins.
    double residual = 0.0;

    double operator()(double energy) const;
};

struct GapProfile {
    std::vector<GapSample> samples;
    GapBins bins;
    PolynomialFit fit;
    double e_min = 0.0;
    double e_max = 0.0;
};

constexpr std::size_t kDefaultGapBins = 100;
constexpr std::size_t kDefaultFitDegree = 6;

/// One sample per vertex with a strictly lower neighbour; local minima are skipped.
std::vector<GapSample> largest_lower_gaps(const SpectrumTable& spectrum);

/// Arithmetic mean of the gaps in uniform bins over [e_min, e_max]. Empty bins are
/// filled by linear interpolation between the nearest non-empty bins.
GapBins mean_gap_profile(std::span<const GapSample> samples, double e_min, double e_max,
                         std::size_t bin_count = kDefaultGapBins);

/// Fits the non-empty bins; throws when fewer than degree + 1 of them exist.
PolynomialFit fit_profile(const GapBins& bins, std::size_t degree = kDefaultFitDegree);

GapProfile analyze_gaps(const SpectrumTable& spectrum, std::size_t bin_count = kDefaultGapBins,
                        std::size_t degree = kDefaultFitDegree);

/// Lower-level population of the two-level subspace with detuning 2 delta, started
/// from the symmetric superposition.
double rabi_probability(double gamma, double delta, double t);

/// Gamma balancing a local cost gap against the driver gap |2 Gamma H_D| = 4 Gamma.
double resonance_gamma(double cost_gap);

/// Spearman rank correlation, ties ranked by their average position.
double spearman(std::span<const double> a, std::span<const double> b);

/// Spearman correlation between bin centre and mean gap over the non-empty bins.
double profile_trend(const GapBins& bins);

}  // namespace gqw
