#include "gqw/kernels.hpp"

#include "gqw/problems.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gqw::kernels {

namespace {

// Below this many amplitudes the fork/join cost outweighs the work.
constexpr std::size_t kParallelThreshold = std::size_t{1} << 14;
constexpr std::size_t kReductionBlock = 4096;

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernel length mismatch");
}

void check_qubit(std::span<const cplx> state, unsigned qubit) {
    if ((std::size_t{2} << qubit) > state.size()) throw std::out_of_range("qubit index");
}

}  // namespace

// ---------------------------------------------------------------------------
// Serial reference
// ---------------------------------------------------------------------------

namespace serial {

std::vector<double> energies(const QuboProblem& problem) {
    const std::size_t dim = std::size_t{1} << problem.n_vars();
    std::vector<double> out(dim);
    for (std::size_t z = 0; z < dim; ++z) out[z] = problem.energy(z);
    return out;
}

void multiply(std::span<cplx> state, std::span<const cplx> factors) {
    check_lengths(state.size(), factors.size());
    for (std::size_t i = 0; i < state.size(); ++i) state[i] *= factors[i];
}

void cost_phase(std::span<cplx> state, std::span<const double> energies, double tau) {
    check_lengths(state.size(), energies.size());
    for (std::size_t i = 0; i < state.size(); ++i) state[i] *= std::polar(1.0, -energies[i] * tau);
}

void rotate_qubit(std::span<cplx> state, unsigned qubit, double theta) {
    check_qubit(state, qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const cplx c{std::cos(theta), 0.0};
    const cplx is{0.0, std::sin(theta)};
    for (std::size_t base = 0; base < state.size(); base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a = state[i];
            const cplx b = state[i + stride];
            state[i] = c * a + is * b;
            state[i + stride] = is * a + c * b;
        }
    }
}

void rotate_all(std::span<cplx> state, unsigned n_qubits, double theta) {
    for (unsigned q = 0; q < n_qubits; ++q) rotate_qubit(state, q, theta);
}

double norm2(std::span<const cplx> state) {
    double sum = 0.0;
    for (const auto& a : state) sum += std::norm(a);
    return sum;
}

double expectation(std::span<const cplx> state, std::span<const double> energies) {
    check_lengths(state.size(), energies.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) sum += std::norm(state[i]) * energies[i];
    return sum;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP
// ---------------------------------------------------------------------------

namespace omp {

std::vector<double> energies(const QuboProblem& problem) {
    const std::size_t n = problem.n_vars();
    const std::size_t dim = std::size_t{1} << n;
    const auto q = problem.dense_coeffs();
    std::vector<double> out(dim);
    out[0] = problem.offset;
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t lo = std::size_t{1} << b;
        const double diag = q[b * n + b];
        const long long count = static_cast<long long>(lo);
#pragma omp parallel for schedule(static) if (lo >= kParallelThreshold)
        for (long long r = 0; r < count; ++r) {
            auto rest = static_cast<std::uint64_t>(r);
            double e = diag;
            for (std::uint64_t bits = rest; bits != 0; bits &= bits - 1) {
                e += q[static_cast<std::size_t>(std::countr_zero(bits)) * n + b];
            }
            out[lo + rest] = out[rest] + e;
        }
    }
    return out;
}

void multiply(std::span<cplx> state, std::span<const cplx> factors) {
    check_lengths(state.size(), factors.size());
    const long long dim = static_cast<long long>(state.size());
    auto* psi = reinterpret_cast<double*>(state.data());
    const auto* f = reinterpret_cast<const double*>(factors.data());
#pragma omp parallel for schedule(static) if (state.size() >= kParallelThreshold)
    for (long long i = 0; i < dim; ++i) {
        const double ar = psi[2 * i], ai = psi[2 * i + 1];
        const double fr = f[2 * i], fi = f[2 * i + 1];
        psi[2 * i] = ar * fr - ai * fi;
        psi[2 * i + 1] = ar * fi + ai * fr;
    }
}

void cost_phase(std::span<cplx> state, std::span<const double> energies, double tau) {
    check_lengths(state.size(), energies.size());
    const long long dim = static_cast<long long>(state.size());
#pragma omp parallel for schedule(static) if (state.size() >= kParallelThreshold)
    for (long long i = 0; i < dim; ++i) state[i] *= std::polar(1.0, -energies[i] * tau);
}

namespace {

// One qubit with stride >= 1 on the interleaved (re, im) layout:
//   a' = c a + i s b,   b' = i s a + c b.
inline void rotate_pairs(double* __restrict a, double* __restrict b, std::size_t count, double c,
                         double s) {
    for (std::size_t k = 0; k < count; ++k) {
        const double ar = a[2 * k], ai = a[2 * k + 1];
        const double br = b[2 * k], bi = b[2 * k + 1];
        a[2 * k] = c * ar - s * bi;
        a[2 * k + 1] = c * ai + s * br;
        b[2 * k] = c * br - s * ai;
        b[2 * k + 1] = c * bi + s * ar;
    }
}

// Qubit 0: partners are adjacent amplitudes.
inline void rotate_adjacent(double* __restrict psi, std::size_t pairs, double c, double s) {
    for (std::size_t k = 0; k < pairs; ++k) {
        double* p = psi + 4 * k;
        const double ar = p[0], ai = p[1], br = p[2], bi = p[3];
        p[0] = c * ar - s * bi;
        p[1] = c * ai + s * br;
        p[2] = c * br - s * ai;
        p[3] = c * bi + s * ar;
    }
}

void rotate_one(double* psi, std::size_t dim, unsigned qubit, double c, double s) {
    const std::size_t stride = std::size_t{1} << qubit;
    if (stride == 1) {
        rotate_adjacent(psi, dim / 2, c, s);
        return;
    }
    const long long blocks = static_cast<long long>(dim / (2 * stride));
    for (long long blk = 0; blk < blocks; ++blk) {
        double* a = psi + 2 * (static_cast<std::size_t>(blk) * 2 * stride);
        rotate_pairs(a, a + 2 * stride, stride, c, s);
    }
}

// Splits the pair range of one qubit into `parts` equal slices.
void rotate_one_slice(double* psi, std::size_t dim, unsigned qubit, double c, double s,
                      std::size_t part, std::size_t parts) {
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t pairs = dim / 2;
    const std::size_t begin = pairs * part / parts;
    const std::size_t end = pairs * (part + 1) / parts;
    std::size_t p = begin;
    while (p < end) {
        const std::size_t blk = p / stride;
        const std::size_t off = p % stride;
        const std::size_t run = std::min(stride - off, end - p);
        double* a = psi + 2 * (blk * 2 * stride + off);
        if (stride == 1) {
            rotate_adjacent(a, run, c, s);
        } else {
            rotate_pairs(a, a + 2 * stride, run, c, s);
        }
        p += run;
    }
}

}  // namespace

void rotate_qubit(std::span<cplx> state, unsigned qubit, double theta) {
    check_qubit(state, qubit);
    auto* psi = reinterpret_cast<double*>(state.data());
    rotate_one(psi, state.size(), qubit, std::cos(theta), std::sin(theta));
}

void rotate_all(std::span<cplx> state, unsigned n_qubits, double theta) {
    if (n_qubits == 0) return;
    check_qubit(state, n_qubits - 1);
    auto* psi = reinterpret_cast<double*>(state.data());
    const std::size_t dim = state.size();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
#ifdef _OPENMP
    if (dim >= kParallelThreshold && omp_get_max_threads() > 1 && !omp_in_parallel()) {
#pragma omp parallel
        {
            const auto parts = static_cast<std::size_t>(omp_get_num_threads());
            const auto part = static_cast<std::size_t>(omp_get_thread_num());
            for (unsigned q = 0; q < n_qubits; ++q) {
                rotate_one_slice(psi, dim, q, c, s, part, parts);
#pragma omp barrier
            }
        }
        return;
    }
#endif
    for (unsigned q = 0; q < n_qubits; ++q) rotate_one(psi, dim, q, c, s);
}

namespace {

template <typename Term>
double blocked_sum(std::size_t n, bool deterministic, Term term) {
    if (!deterministic) {
        double sum = 0.0;
        const long long count = static_cast<long long>(n);
#pragma omp parallel for reduction(+ : sum) schedule(static) if (n >= kParallelThreshold)
        for (long long i = 0; i < count; ++i) sum += term(static_cast<std::size_t>(i));
        return sum;
    }
    const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(blocks, 0.0);
    const long long nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (long long b = 0; b < nb; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
        const std::size_t end = std::min(n, begin + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double sum = 0.0;
    for (double p : partial) sum += p;
    return sum;
}

}  // namespace

double norm2(std::span<const cplx> state, bool deterministic) {
    const auto* psi = reinterpret_cast<const double*>(state.data());
    return blocked_sum(state.size(), deterministic, [psi](std::size_t i) {
        return psi[2 * i] * psi[2 * i] + psi[2 * i + 1] * psi[2 * i + 1];
    });
}

double expectation(std::span<const cplx> state, std::span<const double> energies,
                   bool deterministic) {
    check_lengths(state.size(), energies.size());
    const auto* psi = reinterpret_cast<const double*>(state.data());
    const double* e = energies.data();
    return blocked_sum(state.size(), deterministic, [psi, e](std::size_t i) {
        return (psi[2 * i] * psi[2 * i] + psi[2 * i + 1] * psi[2 * i + 1]) * e[i];
    });
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace gqw::kernels
