#pragma once

// Data-parallel statevector kernels.
//
// Two implementations share one interface: `serial` is the plain reference kept
// for testing and benchmarking, `omp` is the OpenMP version used by the engine.
// Elementwise kernels give identical results in both. Reductions in `omp` use a
// fixed block partition when `deterministic` is set, so their value does not
// depend on the thread count.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace gqw {
class QuboProblem;
}

namespace gqw::kernels {

using cplx = std::complex<double>;

namespace serial {

std::vector<double> energies(const QuboProblem& problem);
void multiply(std::span<cplx> state, std::span<const cplx> factors);
void cost_phase(std::span<cplx> state, std::span<const double> energies, double tau);
void rotate_qubit(std::span<cplx> state, unsigned qubit, double theta);
void rotate_all(std::span<cplx> state, unsigned n_qubits, double theta);
double norm2(std::span<const cplx> state);
double expectation(std::span<const cplx> state, std::span<const double> energies);

}  // namespace serial

namespace omp {

/// Energies of all 2^N strings, built level by level from the highest set bit.
std::vector<double> energies(const QuboProblem& problem);
void multiply(std::span<cplx> state, std::span<const cplx> factors);
void cost_phase(std::span<cplx> state, std::span<const double> energies, double tau);
void rotate_qubit(std::span<cplx> state, unsigned qubit, double theta);
/// exp(+i theta sum_j X_j): every qubit mixed by [[cos, i sin], [i sin, cos]].
void rotate_all(std::span<cplx> state, unsigned n_qubits, double theta);
double norm2(std::span<const cplx> state, bool deterministic = true);
double expectation(std::span<const cplx> state, std::span<const double> energies,
                   bool deterministic = true);

}  // namespace omp

/// Number of threads the omp kernels would use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace gqw::kernels
