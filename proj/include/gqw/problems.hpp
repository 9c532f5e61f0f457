#pragma once

// QUBO instances for exact cover, travelling salesperson and garden
// optimization, their Ising form, affine rescaling and exhaustive spectra.
//
// Bitstring convention: bit i of a basis-state index is variable z_i.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gqw {

enum class ProblemKind { exact_cover, tsp, garden, custom };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// Row-major dense matrix used for the small problem-definition inputs.
template <typename T>
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init);

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool empty() const { return rows == 0 || cols == 0; }
};

template <typename T>
Matrix<T>::Matrix(std::initializer_list<std::initializer_list<T>> init)
    : rows(init.size()), cols(init.size() ? init.begin()->size() : 0) {
    data.reserve(rows * cols);
    for (const auto& row : init) {
        if (row.size() != cols) throw std::invalid_argument("ragged matrix initializer");
        data.insert(data.end(), row.begin(), row.end());
    }
}

struct ExactCoverMeta {
    Matrix<int> subsets;  // N x P incidence matrix
};

struct TspMeta {
    std::size_t cities = 0;
    Matrix<double> costs;
    double lambda = 1.0;
};

struct GardenMeta {
    Matrix<int> adjacency;   // M x M pot adjacency
    Matrix<int> companions;  // P x P species relations in {-1, 0, 1}
    std::vector<int> counts; // plants per species
    double lambda_pots = 1.0;
    double lambda_species = 1.0;
};

using ValidityMeta = std::variant<std::monostate, ExactCoverMeta, TspMeta, GardenMeta>;

/// Rescaled energy = factor * original + shift; composes under repeated rescaling.
struct ScaleRecord {
    double shift = 0.0;
    double factor = 1.0;
};

/// C(z) = offset + sum_i Q_ii z_i + sum_{i<j} Q_ij z_i z_j.
/// Only the upper triangle of `coeffs` is meaningful.
class QuboProblem {
public:
    QuboProblem() = default;
    QuboProblem(std::size_t n_vars, ProblemKind kind);

    std::size_t n_vars() const { return n_; }
    ProblemKind kind() const { return kind_; }

    double coeff(std::size_t i, std::size_t j) const;
    /// Adds to Q_ij (i and j in any order; the entry lands in the upper triangle).
    void add(std::size_t i, std::size_t j, double value);
    void set(std::size_t i, std::size_t j, double value);
    std::span<const double> dense_coeffs() const { return coeffs_; }

    double offset = 0.0;
    ScaleRecord scale_record;
    ValidityMeta validity_meta;
    std::optional<std::uint64_t> seed;

    /// Energy of one bitstring, summed term by term.
    double energy(std::uint64_t z) const;
    /// Penalty/constraint check of the problem family; custom problems treat every string as valid.
    bool is_valid(std::uint64_t z) const;

private:
    std::size_t n_ = 0;
    ProblemKind kind_ = ProblemKind::custom;
    std::vector<double> coeffs_;  // n x n, upper triangle used
};

struct IsingForm {
    std::vector<double> h;  // E contains -sum_i h_i s_i
    Matrix<double> J;       // upper triangle, E contains +sum_{i<j} J_ij s_i s_j
    double offset = 0.0;

    /// Energy of the spin configuration s_i = 1 - 2 z_i.
    double energy(std::uint64_t z) const;
};

struct SpectrumTable {
    std::size_t n_vars = 0;
    std::vector<double> energies;
    std::vector<std::uint8_t> valid;
    std::vector<std::uint64_t> ground_states;
    double e_min = 0.0;
    double e_max = 0.0;
    double e_max_valid = 0.0;
    std::size_t valid_count = 0;
    /// Constraint-only families report solution quality as ground-state probability.
    bool constraint_only = false;
    bool flat = false;
};

class ProblemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kDefaultEnumerationCap = 26;

QuboProblem build_exact_cover(const Matrix<int>& subsets);
QuboProblem build_tsp(const Matrix<double>& costs, double lambda);
QuboProblem build_garden(const Matrix<int>& adjacency, const Matrix<int>& companions,
                         const std::vector<int>& counts, double lambda_pots, double lambda_species);

/// Largest power of two not exceeding 1 / (1 + M * max cost): keeps every tour cheaper
/// than one violated constraint while leaving integer data exactly representable.
double default_tsp_lambda(const Matrix<double>& costs);
/// 2 * max|A| + 1.
double default_garden_lambda(const Matrix<int>& companions);

IsingForm ising_from_qubo(const QuboProblem& problem);

QuboProblem rescale(const QuboProblem& problem, double lo = 0.0, double hi = 100.0);

SpectrumTable enumerate_spectrum(const QuboProblem& problem,
                                 std::size_t cap = kDefaultEnumerationCap);

/// Fills extremes, ground states and validity statistics from `energies` and `valid`.
/// Energies within 1e-12 of zero (relative to the spectrum scale) are set to exactly zero.
void finalize_spectrum(SpectrumTable& table);

/// Oracle-search cost: -1 on `target`, 0 elsewhere. Constraint-only.
SpectrumTable search_spectrum(std::size_t n_vars, std::uint64_t target);

struct SizeParams {
    std::size_t n_vars = 0;   // exact cover; garden (with species)
    std::size_t cities = 0;   // tsp
    std::size_t species = 3;  // garden
};

QuboProblem generate_instance(ProblemKind kind, const SizeParams& size, std::uint64_t seed);

}  // namespace gqw
