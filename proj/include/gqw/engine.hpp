#pragma once

// Statevector evolution under H(t) = Gamma(t) * H_D + H_C with the
// second-order (symmetric) Suzuki-Trotter splitting, H_D = -sum_j X_j.

#include "gqw/problems.hpp"
#include "gqw/schedules.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gqw {

using cplx = std::complex<double>;

/// 2^N amplitudes; bit j of the index is qubit j.
class Statevector {
public:
    Statevector() = default;
    explicit Statevector(unsigned n_qubits);
    Statevector(unsigned n_qubits, std::vector<cplx> amplitudes);

    unsigned n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<cplx> amplitudes() { return amps_; }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx operator[](std::size_t i) const { return amps_[i]; }

    double norm() const;
    std::vector<double> probabilities() const;

    static Statevector basis(unsigned n_qubits, std::uint64_t index);

private:
    unsigned n_ = 0;
    std::vector<cplx> amps_;
};

constexpr unsigned kMaxQubits = 30;

Statevector equal_superposition(unsigned n_qubits);

/// psi_z <- psi_z exp(-i E_z tau).
void apply_cost_phase(Statevector& state, std::span<const double> energies, double tau);
/// exp(-i theta H_D) = prod_j exp(+i theta X_j).
void apply_driver_rotation(Statevector& state, double theta);
/// exp(-i H_C dt/2) exp(-i Gamma(t + dt/2) H_D dt) exp(-i H_C dt/2).
void trotter_step(Statevector& state, std::span<const double> energies, const Schedule& schedule,
                  double t, double dt);

double energy_expectation(const Statevector& state, std::span<const double> energies,
                          bool deterministic = true);

/// Probability mass per uniform energy bin over [e_min, e_max].
std::vector<double> level_probabilities(const Statevector& state, const SpectrumTable& spectrum,
                                        std::size_t bins);

struct EvolutionConfig {
    double total_time = 1.0;
    double dt = 1e-3;
    bool record = false;
    /// Steps between trace samples; 0 picks a stride giving about `target_samples` samples.
    std::size_t record_stride = 0;
    std::size_t target_samples = 200;
    std::size_t energy_bins = 50;
    bool deterministic = true;
    double norm_abort = 1e-6;
};

struct TraceSample {
    double t = 0.0;
    double gamma = 0.0;
    double energy = 0.0;
    double p_gs = 0.0;
    std::vector<double> bins;
};

struct RunRecord {
    double e_psi = 0.0;
    double p_gs = 0.0;
    double s_q = 0.0;
    double norm_error = 0.0;
    std::size_t steps = 0;
    std::string schedule;  // JSON descriptor
    std::vector<TraceSample> trace;
    double wall_seconds = 0.0;
};

class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvolutionResult {
    Statevector state;
    RunRecord record;
};

/// Evolves |+>^N for ceil(T/dt) equal steps. Throws NumericalAbort when the norm
/// drifts beyond `norm_abort`.
EvolutionResult evolve(const SpectrumTable& spectrum, const Schedule& schedule,
                       const EvolutionConfig& config);

std::size_t step_count(double total_time, double dt);

// ---------------------------------------------------------------------------
// Instantaneous spectrum of Gamma * H_D + H_C
// ---------------------------------------------------------------------------

enum class EigenMethod { automatic, dense, lanczos };

constexpr unsigned kDenseSpectrumCap = 12;
constexpr unsigned kLanczosSpectrumCap = 20;

struct InstantaneousSpectrum {
    std::vector<double> eigenvalues;                // ascending, distinct levels
    std::vector<std::vector<double>> eigenvectors;  // real, unit norm; empty unless requested
};

/// The k lowest distinct eigenvalues (levels closer than 1e-9 are merged).
InstantaneousSpectrum instantaneous_spectrum(std::span<const double> energies, double gamma,
                                             std::size_t k, bool want_vectors = false,
                                             EigenMethod method = EigenMethod::automatic);

// ---------------------------------------------------------------------------
// Raw state dump: "GQWSTATE", u32 N, u32 reserved, then 2^N (re, im) f64 pairs, little endian.
// ---------------------------------------------------------------------------

void write_state_dump(const Statevector& state, const std::filesystem::path& path);
Statevector read_state_dump(const std::filesystem::path& path);

}  // namespace gqw
