#include "gqw/engine.hpp"

#include "gqw/kernels.hpp"
#include "gqw/metrics.hpp"
#include "lanczos.hpp"

#include <Eigen/Dense>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gqw {

namespace {

void check_qubits(unsigned n) {
    if (n > kMaxQubits) {
        throw std::invalid_argument("statevector of " + std::to_string(n) +
                                    " qubits exceeds the cap of " + std::to_string(kMaxQubits));
    }
}

void check_length(const Statevector& state, std::span<const double> energies) {
    if (energies.size() != state.dim()) {
        throw std::invalid_argument("energy table length " + std::to_string(energies.size()) +
                                    " does not match statevector dimension " +
                                    std::to_string(state.dim()));
    }
}

}  // namespace

Statevector::Statevector(unsigned n_qubits) : n_(n_qubits) {
    check_qubits(n_qubits);
    amps_.assign(std::size_t{1} << n_qubits, cplx{});
    amps_[0] = 1.0;
}

Statevector::Statevector(unsigned n_qubits, std::vector<cplx> amplitudes)
    : n_(n_qubits), amps_(std::move(amplitudes)) {
    check_qubits(n_qubits);
    if (amps_.size() != (std::size_t{1} << n_qubits)) {
        throw std::invalid_argument("amplitude count does not match 2^N");
    }
}

double Statevector::norm() const { return std::sqrt(kernels::omp::norm2(amps_)); }

std::vector<double> Statevector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
}

Statevector Statevector::basis(unsigned n_qubits, std::uint64_t index) {
    Statevector s(n_qubits);
    if (index >= s.dim()) throw std::invalid_argument("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

Statevector equal_superposition(unsigned n_qubits) {
    check_qubits(n_qubits);
    const std::size_t dim = std::size_t{1} << n_qubits;
    const double a = 1.0 / std::sqrt(static_cast<double>(dim));
    return Statevector(n_qubits, std::vector<cplx>(dim, cplx{a, 0.0}));
}

void apply_cost_phase(Statevector& state, std::span<const double> energies, double tau) {
    check_length(state, energies);
    kernels::omp::cost_phase(state.amplitudes(), energies, tau);
}

void apply_driver_rotation(Statevector& state, double theta) {
    kernels::omp::rotate_all(state.amplitudes(), state.n_qubits(), theta);
}

void trotter_step(Statevector& state, std::span<const double> energies, const Schedule& schedule,
                  double t, double dt) {
    apply_cost_phase(state, energies, 0.5 * dt);
    apply_driver_rotation(state, schedule.gamma(t + 0.5 * dt) * dt);
    apply_cost_phase(state, energies, 0.5 * dt);
}

double energy_expectation(const Statevector& state, std::span<const double> energies,
                          bool deterministic) {
    check_length(state, energies);
    return kernels::omp::expectation(state.amplitudes(), energies, deterministic);
}

std::vector<double> level_probabilities(const Statevector& state, const SpectrumTable& spectrum,
                                        std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("bin count must be positive");
    check_length(state, spectrum.energies);
    std::vector<double> hist(bins, 0.0);
    const double span = spectrum.e_max - spectrum.e_min;
    const auto amps = state.amplitudes();
    for (std::size_t z = 0; z < amps.size(); ++z) {
        std::size_t b = 0;
        if (span > 0.0) {
            const double pos = (spectrum.energies[z] - spectrum.e_min) / span * static_cast<double>(bins);
            b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, pos)));
        }
        hist[b] += std::norm(amps[z]);
    }
    return hist;
}

std::size_t step_count(double total_time, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(total_time >= 0.0) || !std::isfinite(total_time)) {
        throw std::invalid_argument("total time must be non-negative");
    }
    const double ratio = total_time / dt;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(ratio));
}

EvolutionResult evolve(const SpectrumTable& spectrum, const Schedule& schedule,
                       const EvolutionConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.dt > config.total_time && config.total_time > 0.0) {
        throw std::invalid_argument("dt must not exceed the total time");
    }
    if (spectrum.n_vars > kMaxQubits) throw std::invalid_argument("too many qubits");

    const auto n_qubits = static_cast<unsigned>(spectrum.n_vars);
    const std::span<const double> energies = spectrum.energies;
    const std::size_t steps = step_count(config.total_time, config.dt);
    const double dt = steps > 0 ? config.total_time / static_cast<double>(steps) : 0.0;

    EvolutionResult result{equal_superposition(n_qubits), {}};
    auto& state = result.state;
    auto& rec = result.record;
    rec.steps = steps;
    rec.schedule = schedule.to_json().dump();

    std::size_t stride = config.record_stride;
    if (stride == 0) stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, config.target_samples));

    auto check_norm = [&](double t) {
        const double err = std::abs(state.norm() - 1.0);
        rec.norm_error = std::max(rec.norm_error, err);
        if (!(err <= config.norm_abort)) {
            throw NumericalAbort("norm drift " + std::to_string(err) + " at t = " +
                                 std::to_string(t) + " exceeds " +
                                 std::to_string(config.norm_abort) + " (dt = " +
                                 std::to_string(dt) + ", Gamma(t) = " +
                                 std::to_string(schedule.gamma(t)) + ")");
        }
    };
    // Probabilities and energies ignore the pending diagonal phase, so samples may
    // be taken between the fused cost-phase factors.
    auto sample = [&](double t) {
        TraceSample s;
        s.t = t;
        s.gamma = schedule.gamma(t);
        s.energy = energy_expectation(state, energies, config.deterministic);
        double p = 0.0;
        for (auto z : spectrum.ground_states) p += std::norm(state[z]);
        s.p_gs = p;
        s.bins = level_probabilities(state, spectrum, std::max<std::size_t>(1, config.energy_bins));
        rec.trace.push_back(std::move(s));
    };

    if (config.record) sample(0.0);

    if (steps > 0) {
        std::vector<cplx> full(state.dim());
        for (std::size_t z = 0; z < full.size(); ++z) {
            full[z] = std::polar(1.0, -energies[z] * dt);
        }
        kernels::omp::cost_phase(state.amplitudes(), energies, 0.5 * dt);
        for (std::size_t k = 0; k < steps; ++k) {
            const double t_mid = (static_cast<double>(k) + 0.5) * dt;
            apply_driver_rotation(state, schedule.gamma(t_mid) * dt);
            if (k + 1 < steps) {
                kernels::omp::multiply(state.amplitudes(), full);
            } else {
                kernels::omp::cost_phase(state.amplitudes(), energies, 0.5 * dt);
            }
            const bool last = k + 1 == steps;
            if (config.record && ((k + 1) % stride == 0 || last)) {
                const double t = last ? config.total_time : static_cast<double>(k + 1) * dt;
                check_norm(t);
                sample(t);
            }
        }
    }
    check_norm(config.total_time);

    const auto probs = state.probabilities();
    const auto report = metric_report(probs, spectrum);
    rec.e_psi = energy_expectation(state, energies, config.deterministic);
    rec.p_gs = report.p_gs;
    rec.s_q = report.s_q;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Instantaneous spectrum
// ---------------------------------------------------------------------------

namespace {

InstantaneousSpectrum dense_spectrum(std::span<const double> energies, unsigned n, double gamma,
                                     std::size_t k, bool want_vectors) {
    const auto dim = static_cast<Eigen::Index>(energies.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index z = 0; z < dim; ++z) {
        h(z, z) = energies[static_cast<std::size_t>(z)];
        for (unsigned j = 0; j < n; ++j) h(z, z ^ (Eigen::Index{1} << j)) = -gamma;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");

    InstantaneousSpectrum out;
    const auto& values = solver.eigenvalues();
    for (Eigen::Index i = 0; i < dim && out.eigenvalues.size() < k; ++i) {
        const double v = values(i);
        if (!out.eigenvalues.empty() &&
            std::abs(v - out.eigenvalues.back()) <= 1e-9 * std::max(1.0, std::abs(v))) {
            continue;
        }
        out.eigenvalues.push_back(v);
        if (want_vectors) {
            const auto col = solver.eigenvectors().col(i);
            out.eigenvectors.emplace_back(col.data(), col.data() + dim);
        }
    }
    return out;
}

}  // namespace

InstantaneousSpectrum instantaneous_spectrum(std::span<const double> energies, double gamma,
                                             std::size_t k, bool want_vectors,
                                             EigenMethod method) {
    if (energies.empty() || !std::has_single_bit(energies.size())) {
        throw std::invalid_argument("energy table length must be a power of two");
    }
    const auto n = static_cast<unsigned>(std::countr_zero(energies.size()));
    if (k == 0) return {};
    if (method == EigenMethod::automatic) {
        method = n <= kDenseSpectrumCap ? EigenMethod::dense : EigenMethod::lanczos;
    }
    if (method == EigenMethod::dense) {
        if (n > kDenseSpectrumCap) {
            throw std::invalid_argument("dense instantaneous spectrum is limited to N <= " +
                                        std::to_string(kDenseSpectrumCap));
        }
        return dense_spectrum(energies, n, gamma, k, want_vectors);
    }
    if (n > kLanczosSpectrumCap) {
        throw std::invalid_argument("iterative instantaneous spectrum is limited to N <= " +
                                    std::to_string(kLanczosSpectrumCap));
    }
    return detail::lanczos_lowest(energies, n, gamma, k, want_vectors);
}

// ---------------------------------------------------------------------------
// State dump
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'Q', 'W', 'S', 'T', 'A', 'T', 'E'};

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    return v;
}

}  // namespace

void write_state_dump(const Statevector& state, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t n = to_little<std::uint32_t>(state.n_qubits());
    const std::uint32_t reserved = 0;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    for (const auto& a : state.amplitudes()) {
        const double re = to_little(a.real());
        const double im = to_little(a.imag());
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

Statevector read_state_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    std::uint32_t n = 0, reserved = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error(path.string() + " is not a state dump");
    }
    n = to_little(n);
    check_qubits(n);
    std::vector<cplx> amps(std::size_t{1} << n);
    for (auto& a : amps) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        a = cplx{to_little(re), to_little(im)};
    }
    if (!in) throw std::runtime_error(path.string() + " is truncated");
    return Statevector(n, std::move(amps));
}

}  // namespace gqw
