#include "gqw/problems.hpp"

#include "gqw/kernels.hpp"
#include "gqw/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gqw {

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::exact_cover: return "exact_cover";
        case ProblemKind::tsp: return "tsp";
        case ProblemKind::garden: return "garden";
        case ProblemKind::custom: return "custom";
    }
    return "custom";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "exact_cover" || name == "ec") return ProblemKind::exact_cover;
    if (name == "tsp") return ProblemKind::tsp;
    if (name == "garden" || name == "go") return ProblemKind::garden;
    if (name == "custom") return ProblemKind::custom;
    throw ProblemError("unknown problem kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// QuboProblem
// ---------------------------------------------------------------------------

QuboProblem::QuboProblem(std::size_t n_vars, ProblemKind kind)
    : n_(n_vars), kind_(kind), coeffs_(n_vars * n_vars, 0.0) {
    if (n_vars == 0) throw ProblemError("a problem needs at least one variable");
    if (n_vars > 62) throw ProblemError("too many variables for 64-bit bitstrings");
}

double QuboProblem::coeff(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return coeffs_[i * n_ + j];
}

void QuboProblem::add(std::size_t i, std::size_t j, double value) {
    if (i > j) std::swap(i, j);
    coeffs_[i * n_ + j] += value;
}

void QuboProblem::set(std::size_t i, std::size_t j, double value) {
    if (i > j) std::swap(i, j);
    coeffs_[i * n_ + j] = value;
}

double QuboProblem::energy(std::uint64_t z) const {
    double e = offset;
    for (std::size_t i = 0; i < n_; ++i) {
        if (((z >> i) & 1u) == 0) continue;
        e += coeffs_[i * n_ + i];
        for (std::size_t j = i + 1; j < n_; ++j) {
            if ((z >> j) & 1u) e += coeffs_[i * n_ + j];
        }
    }
    return e;
}

namespace {

bool bit(std::uint64_t z, std::size_t i) { return ((z >> i) & 1u) != 0; }

bool exact_cover_valid(const ExactCoverMeta& meta, std::uint64_t z) {
    const auto& a = meta.subsets;
    for (std::size_t k = 0; k < a.cols; ++k) {
        int hits = 0;
        for (std::size_t i = 0; i < a.rows; ++i) hits += a(i, k) * (bit(z, i) ? 1 : 0);
        if (hits != 1) return false;
    }
    return true;
}

std::size_t tsp_reduced_index(std::size_t cities, std::size_t location, std::size_t step) {
    return (location - 1) * (cities - 1) + (step - 1);
}

bool tsp_valid(const TspMeta& meta, std::uint64_t z) {
    const std::size_t m = meta.cities;
    for (std::size_t k = 1; k < m; ++k) {
        int row = 0;
        int col = 0;
        for (std::size_t t = 1; t < m; ++t) {
            row += bit(z, tsp_reduced_index(m, k, t)) ? 1 : 0;
            col += bit(z, tsp_reduced_index(m, t, k)) ? 1 : 0;
        }
        if (row != 1 || col != 1) return false;
    }
    return true;
}

bool garden_valid(const GardenMeta& meta, std::uint64_t z) {
    const std::size_t species = meta.counts.size();
    const std::size_t pots = meta.adjacency.rows;
    for (std::size_t k = 0; k < pots; ++k) {
        int planted = 0;
        for (std::size_t j = 0; j < species; ++j) planted += bit(z, k * species + j) ? 1 : 0;
        if (planted != 1) return false;
    }
    for (std::size_t j = 0; j < species; ++j) {
        int used = 0;
        for (std::size_t k = 0; k < pots; ++k) used += bit(z, k * species + j) ? 1 : 0;
        if (used != meta.counts[j]) return false;
    }
    return true;
}

}  // namespace

bool QuboProblem::is_valid(std::uint64_t z) const {
    return std::visit(
        [z](const auto& meta) -> bool {
            using M = std::decay_t<decltype(meta)>;
            if constexpr (std::is_same_v<M, ExactCoverMeta>) {
                return exact_cover_valid(meta, z);
            } else if constexpr (std::is_same_v<M, TspMeta>) {
                return tsp_valid(meta, z);
            } else if constexpr (std::is_same_v<M, GardenMeta>) {
                return garden_valid(meta, z);
            } else {
                return true;
            }
        },
        validity_meta);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

// Quadratic pseudo-boolean form accumulated term by term, with z_i^2 = z_i.
class QuadraticForm {
public:
    explicit QuadraticForm(std::size_t n) : n_(n), q_(n * n, 0.0) {}

    void add_pair(std::size_t i, std::size_t j, double c) {
        if (i > j) std::swap(i, j);
        q_[i * n_ + j] += c;
    }
    void add_linear(std::size_t i, double c) { q_[i * n_ + i] += c; }
    void add_constant(double c) { constant_ += c; }

    /// weight * (sum_p a_p z_{i_p} - target)^2
    void add_squared(const std::vector<std::pair<std::size_t, double>>& terms, double target,
                     double weight) {
        for (const auto& [ip, ap] : terms) {
            for (const auto& [iq, aq] : terms) add_pair(ip, iq, weight * ap * aq);
            add_linear(ip, -2.0 * weight * target * ap);
        }
        add_constant(weight * target * target);
    }

    /// Substitutes fixed values (`fixed[i]` = 0/1, or -1 for free) and renumbers free variables.
    QuboProblem reduce(const std::vector<int>& fixed, ProblemKind kind) const {
        std::vector<std::size_t> index(n_, 0);
        std::size_t free_count = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (fixed[i] < 0) index[i] = free_count++;
        }
        QuboProblem out(free_count, kind);
        out.offset = constant_;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double c = q_[i * n_ + j];
                if (c == 0.0) continue;
                const bool fi = fixed[i] >= 0;
                const bool fj = fixed[j] >= 0;
                if (!fi && !fj) {
                    out.add(index[i], index[j], c);
                } else if (fi && fj) {
                    out.offset += c * fixed[i] * (i == j ? 1 : fixed[j]);
                } else if (fi) {
                    out.add(index[j], index[j], c * fixed[i]);
                } else {
                    out.add(index[i], index[i], c * fixed[j]);
                }
            }
        }
        return out;
    }

    QuboProblem finish(ProblemKind kind) const { return reduce(std::vector<int>(n_, -1), kind); }

private:
    std::size_t n_;
    std::vector<double> q_;
    double constant_ = 0.0;
};

}  // namespace

QuboProblem build_exact_cover(const Matrix<int>& subsets) {
    if (subsets.empty()) throw ProblemError("exact cover needs a nonempty subset matrix");
    const std::size_t n = subsets.rows;
    const std::size_t p = subsets.cols;
    QuboProblem problem(n, ProblemKind::exact_cover);
    // The constant P of the expanded square is a global offset.
    problem.offset = static_cast<double>(p);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 0.0;
        for (std::size_t k = 0; k < p; ++k) diag += subsets(i, k) * (subsets(i, k) - 2);
        problem.set(i, i, diag);
        for (std::size_t j = i + 1; j < n; ++j) {
            double overlap = 0.0;
            for (std::size_t k = 0; k < p; ++k) overlap += 2 * subsets(i, k) * subsets(j, k);
            problem.set(i, j, overlap);
        }
    }
    std::size_t uncovered = 0;
    for (std::size_t k = 0; k < p; ++k) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) any = any || subsets(i, k) != 0;
        if (!any) ++uncovered;
    }
    if (uncovered > 0) {
        spdlog::warn("exact cover: {} element(s) belong to no subset; no cover exists", uncovered);
    }
    problem.validity_meta = ExactCoverMeta{subsets};
    return problem;
}

double default_tsp_lambda(const Matrix<double>& costs) {
    double max_cost = 0.0;
    for (std::size_t i = 0; i < costs.rows; ++i) {
        for (std::size_t j = 0; j < costs.cols; ++j) {
            if (i != j) max_cost = std::max(max_cost, costs(i, j));
        }
    }
    const double bound = 1.0 / (1.0 + static_cast<double>(costs.rows) * max_cost);
    return std::exp2(std::floor(std::log2(bound)));
}

QuboProblem build_tsp(const Matrix<double>& costs, double lambda) {
    if (costs.rows != costs.cols) throw ProblemError("tsp cost matrix must be square");
    const std::size_t m = costs.rows;
    if (m < 3) throw ProblemError("tsp needs at least 3 locations");
    if (!(lambda > 0.0)) throw ProblemError("tsp lambda must be positive");

    // Full form over z_{kM+t}: location k visited at step t.
    QuadraticForm form(m * m);
    auto var = [m](std::size_t k, std::size_t t) { return k * m + t; };
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < m; ++j) {
            if (k == j) continue;
            for (std::size_t t = 0; t < m; ++t) {
                form.add_pair(var(k, t), var(j, (t + 1) % m), lambda * costs(k, j));
            }
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t t = 0; t < m; ++t) row.emplace_back(var(k, t), 1.0);
        form.add_squared(row, 1.0, 1.0);
    }
    for (std::size_t t = 0; t < m; ++t) {
        std::vector<std::pair<std::size_t, double>> col;
        for (std::size_t k = 0; k < m; ++k) col.emplace_back(var(k, t), 1.0);
        form.add_squared(col, 1.0, 1.0);
    }

    // Location 0 is visited first.
    std::vector<int> fixed(m * m, -1);
    fixed[var(0, 0)] = 1;
    for (std::size_t t = 1; t < m; ++t) fixed[var(0, t)] = 0;
    for (std::size_t k = 1; k < m; ++k) fixed[var(k, 0)] = 0;

    QuboProblem problem = form.reduce(fixed, ProblemKind::tsp);
    problem.validity_meta = TspMeta{m, costs, lambda};
    return problem;
}

double default_garden_lambda(const Matrix<int>& companions) {
    int max_abs = 0;
    for (int a : companions.data) max_abs = std::max(max_abs, std::abs(a));
    return 2.0 * max_abs + 1.0;
}

QuboProblem build_garden(const Matrix<int>& adjacency, const Matrix<int>& companions,
                         const std::vector<int>& counts, double lambda_pots,
                         double lambda_species) {
    const std::size_t pots = adjacency.rows;
    const std::size_t species = companions.rows;
    if (pots == 0 || adjacency.cols != pots) throw ProblemError("garden adjacency must be square");
    if (species == 0 || companions.cols != species) {
        throw ProblemError("garden companion matrix must be square");
    }
    if (counts.size() != species) throw ProblemError("garden needs one count per species");
    const long total = std::accumulate(counts.begin(), counts.end(), 0L);
    if (total != static_cast<long>(pots)) {
        throw ProblemError("garden species counts must sum to the number of pots");
    }
    for (std::size_t k = 0; k < pots; ++k) {
        if (adjacency(k, k) != 0) throw ProblemError("garden adjacency must have zero diagonal");
        for (std::size_t l = 0; l < pots; ++l) {
            if (adjacency(k, l) != adjacency(l, k)) {
                throw ProblemError("garden adjacency must be symmetric");
            }
        }
    }
    for (std::size_t j = 0; j < species; ++j) {
        for (std::size_t l = 0; l < species; ++l) {
            if (companions(j, l) != companions(l, j)) {
                throw ProblemError("garden companion matrix must be symmetric");
            }
        }
    }

    QuadraticForm form(pots * species);
    auto var = [species](std::size_t k, std::size_t j) { return k * species + j; };
    for (std::size_t k = 0; k < pots; ++k) {
        for (std::size_t kk = 0; kk < pots; ++kk) {
            if (adjacency(k, kk) == 0) continue;
            const double w = adjacency(k, kk);
            form.add_constant(w);
            for (std::size_t j = 0; j < species; ++j) {
                for (std::size_t jj = 0; jj < species; ++jj) {
                    form.add_pair(var(k, j), var(kk, jj), w * companions(j, jj));
                }
            }
        }
    }
    for (std::size_t k = 0; k < pots; ++k) {
        std::vector<std::pair<std::size_t, double>> pot;
        for (std::size_t j = 0; j < species; ++j) pot.emplace_back(var(k, j), 1.0);
        form.add_squared(pot, 1.0, lambda_pots);
    }
    for (std::size_t j = 0; j < species; ++j) {
        std::vector<std::pair<std::size_t, double>> kind;
        for (std::size_t k = 0; k < pots; ++k) kind.emplace_back(var(k, j), 1.0);
        form.add_squared(kind, static_cast<double>(counts[j]), lambda_species);
    }

    QuboProblem problem = form.finish(ProblemKind::garden);
    problem.validity_meta = GardenMeta{adjacency, companions, counts, lambda_pots, lambda_species};
    return problem;
}

// ---------------------------------------------------------------------------
// Ising form, rescaling, enumeration
// ---------------------------------------------------------------------------

IsingForm ising_from_qubo(const QuboProblem& problem) {
    // z_i = (1 - s_i) / 2 substituted exactly.
    const std::size_t n = problem.n_vars();
    IsingForm ising;
    ising.h.assign(n, 0.0);
    ising.J = Matrix<double>(n, n, 0.0);
    ising.offset = problem.offset;
    for (std::size_t i = 0; i < n; ++i) {
        const double qii = problem.coeff(i, i);
        ising.offset += qii / 2.0;
        ising.h[i] += qii / 2.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double qij = problem.coeff(i, j);
            ising.J(i, j) = qij / 4.0;
            ising.offset += qij / 4.0;
            ising.h[i] += qij / 4.0;
            ising.h[j] += qij / 4.0;
        }
    }
    return ising;
}

double IsingForm::energy(std::uint64_t z) const {
    const std::size_t n = h.size();
    auto spin = [z](std::size_t i) { return ((z >> i) & 1u) ? -1.0 : 1.0; };
    double e = offset;
    for (std::size_t i = 0; i < n; ++i) {
        e -= h[i] * spin(i);
        for (std::size_t j = i + 1; j < n; ++j) e += J(i, j) * spin(i) * spin(j);
    }
    return e;
}

QuboProblem rescale(const QuboProblem& problem, double lo, double hi) {
    if (!(hi > lo)) throw ProblemError("rescale needs hi > lo");
    const auto energies = kernels::omp::energies(problem);
    const auto [mn, mx] = std::minmax_element(energies.begin(), energies.end());
    const double e_min = *mn;
    const double e_max = *mx;
    if (!(e_max > e_min)) throw ProblemError("flat spectrum");

    const double factor = (hi - lo) / (e_max - e_min);
    const double shift = lo - factor * e_min;
    QuboProblem out = problem;
    const std::size_t n = problem.n_vars();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) out.set(i, j, factor * problem.coeff(i, j));
    }
    out.offset = factor * (problem.offset - e_min) + lo;
    out.scale_record.factor = factor * problem.scale_record.factor;
    out.scale_record.shift = factor * problem.scale_record.shift + shift;
    return out;
}

namespace {

double degeneracy_tolerance(double e_min, double e_max) {
    return 1e-9 * std::max({1.0, std::abs(e_min), std::abs(e_max)});
}

}  // namespace

void finalize_spectrum(SpectrumTable& table) {
    const std::size_t dim = table.energies.size();
    if (dim == 0) throw ProblemError("empty spectrum");
    {
        // Summing rescaled coefficients leaves rounding noise where the energy is 0.
        const auto [lo, hi] = std::minmax_element(table.energies.begin(), table.energies.end());
        const double zero_tol = 1e-3 * degeneracy_tolerance(*lo, *hi);
        for (auto& e : table.energies) {
            if (std::abs(e) <= zero_tol) e = 0.0;
        }
    }
    const auto [mn, mx] = std::minmax_element(table.energies.begin(), table.energies.end());
    table.e_min = *mn;
    table.e_max = *mx;
    const double tol = degeneracy_tolerance(table.e_min, table.e_max);
    table.flat = (table.e_max - table.e_min) <= tol;
    table.ground_states.clear();
    table.valid_count = 0;
    bool any_valid = false;
    table.e_max_valid = table.e_min;
    for (std::size_t z = 0; z < dim; ++z) {
        if (table.energies[z] <= table.e_min + tol) table.ground_states.push_back(z);
        if (table.valid[z]) {
            ++table.valid_count;
            if (!any_valid || table.energies[z] > table.e_max_valid) {
                table.e_max_valid = table.energies[z];
            }
            any_valid = true;
        }
    }
    if (table.flat) spdlog::warn("flat spectrum: all {} states are ground states", dim);
    if (!any_valid) spdlog::warn("spectrum has no valid states");
}

SpectrumTable enumerate_spectrum(const QuboProblem& problem, std::size_t cap) {
    const std::size_t n = problem.n_vars();
    if (n > cap) {
        throw ProblemError("problem has " + std::to_string(n) +
                           " variables, above the enumeration cap of " + std::to_string(cap) +
                           "; use a streaming analysis instead");
    }
    SpectrumTable table;
    table.n_vars = n;
    table.energies = kernels::omp::energies(problem);
    const std::size_t dim = table.energies.size();
    table.valid.assign(dim, 0);
    const long long count = static_cast<long long>(dim);
#pragma omp parallel for schedule(static) if (dim >= (1u << 14))
    for (long long z = 0; z < count; ++z) {
        table.valid[static_cast<std::size_t>(z)] =
            problem.is_valid(static_cast<std::uint64_t>(z)) ? 1 : 0;
    }
    table.constraint_only = problem.kind() == ProblemKind::exact_cover;
    finalize_spectrum(table);
    return table;
}

SpectrumTable search_spectrum(std::size_t n_vars, std::uint64_t target) {
    if (n_vars == 0 || n_vars > kDefaultEnumerationCap) {
        throw ProblemError("search problem size out of range");
    }
    const std::size_t dim = std::size_t{1} << n_vars;
    if (target >= dim) throw ProblemError("search target outside the state space");
    SpectrumTable table;
    table.n_vars = n_vars;
    table.energies.assign(dim, 0.0);
    table.energies[target] = -1.0;
    table.valid.assign(dim, 0);
    table.valid[target] = 1;
    table.constraint_only = true;
    finalize_spectrum(table);
    return table;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

namespace {

// Number of exact covers of the incidence matrix, counting stops at `limit`.
std::size_t count_exact_covers(const Matrix<int>& a, std::size_t limit) {
    const std::size_t n = a.rows;
    const std::size_t p = a.cols;
    std::vector<std::uint64_t> masks(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            if (a(i, k)) masks[i] |= std::uint64_t{1} << k;
        }
    }
    const std::uint64_t full = (p == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << p) - 1);
    std::size_t found = 0;
    auto search = [&](auto&& self, std::uint64_t covered) -> void {
        if (found >= limit) return;
        if (covered == full) {
            ++found;
            return;
        }
        // Branch on the lowest uncovered element: exactly one chosen subset must contain it.
        const int element = std::countr_zero(~covered & full);
        const std::uint64_t need = std::uint64_t{1} << element;
        for (std::size_t i = 0; i < n; ++i) {
            if ((masks[i] & need) && (masks[i] & covered) == 0) self(self, covered | masks[i]);
        }
    };
    search(search, 0);
    return found;
}

QuboProblem generate_exact_cover(std::size_t n, Rng& rng) {
    if (n < 2 || n > 30) throw ProblemError("unsupported exact cover size");
    const std::size_t elements = std::max<std::size_t>(2, n / 2);
    constexpr int kBudget = 20000;
    for (int attempt = 0; attempt < kBudget; ++attempt) {
        Matrix<int> a(n, elements, 0);
        // Planted cover: a random partition of the elements into a few blocks.
        const std::size_t blocks = 2 + rng.uniform_index(std::max<std::size_t>(1, elements / 2));
        std::vector<std::size_t> owner(elements);
        for (auto& o : owner) o = rng.uniform_index(blocks);
        std::vector<std::vector<int>> rows;
        for (std::size_t b = 0; b < blocks; ++b) {
            std::vector<int> row(elements, 0);
            bool any = false;
            for (std::size_t k = 0; k < elements; ++k) {
                if (owner[k] == b) row[k] = 1, any = true;
            }
            if (any) rows.push_back(row);
        }
        if (rows.size() >= n) continue;
        while (rows.size() < n) {
            std::vector<int> row(elements, 0);
            bool any = false;
            for (auto& v : row) {
                v = rng.uniform01() < 0.35 ? 1 : 0;
                any = any || v;
            }
            if (!any) row[rng.uniform_index(elements)] = 1;
            rows.push_back(row);
        }
        rng.shuffle(rows);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < elements; ++k) a(i, k) = rows[i][k];
        }
        if (count_exact_covers(a, 2) == 1) return build_exact_cover(a);
    }
    throw ProblemError("exact cover generation exhausted its rejection budget");
}

QuboProblem generate_tsp(std::size_t cities, Rng& rng) {
    if (cities < 3 || cities > 6) throw ProblemError("unsupported tsp size");
    Matrix<double> costs(cities, cities, 0.0);
    for (std::size_t i = 0; i < cities; ++i) {
        for (std::size_t j = i + 1; j < cities; ++j) {
            const double c = static_cast<double>(1 + rng.uniform_index(10));
            costs(i, j) = c;
            costs(j, i) = c;
        }
    }
    return build_tsp(costs, default_tsp_lambda(costs));
}

QuboProblem generate_garden(std::size_t n, std::size_t species, Rng& rng) {
    if (species == 0 || n % species != 0 || n / species < 2 || n > 30) {
        throw ProblemError("unsupported garden size");
    }
    const std::size_t pots = n / species;
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * pots)));
    std::vector<std::size_t> cells(side * side);
    std::iota(cells.begin(), cells.end(), 0);
    rng.shuffle(cells);
    cells.resize(pots);

    Matrix<int> adjacency(pots, pots, 0);
    for (std::size_t k = 0; k < pots; ++k) {
        for (std::size_t l = 0; l < pots; ++l) {
            const long dx = static_cast<long>(cells[k] % side) - static_cast<long>(cells[l] % side);
            const long dy = static_cast<long>(cells[k] / side) - static_cast<long>(cells[l] / side);
            if (std::abs(dx) + std::abs(dy) == 1) adjacency(k, l) = 1;
        }
    }
    Matrix<int> companions(species, species, 0);
    for (std::size_t j = 0; j < species; ++j) {
        for (std::size_t l = j; l < species; ++l) {
            const int v = static_cast<int>(rng.uniform_index(3)) - 1;
            companions(j, l) = v;
            companions(l, j) = v;
        }
    }
    std::vector<int> counts(species, static_cast<int>(pots / species));
    for (std::size_t j = 0; j < pots % species; ++j) ++counts[j];
    const double lambda = default_garden_lambda(companions);
    return build_garden(adjacency, companions, counts, lambda, lambda);
}

}  // namespace

QuboProblem generate_instance(ProblemKind kind, const SizeParams& size, std::uint64_t seed) {
    Rng rng(seed);
    QuboProblem problem;
    switch (kind) {
        case ProblemKind::exact_cover: problem = generate_exact_cover(size.n_vars, rng); break;
        case ProblemKind::tsp: problem = generate_tsp(size.cities, rng); break;
        case ProblemKind::garden:
            problem = generate_garden(size.n_vars, size.species, rng);
            break;
        case ProblemKind::custom: throw ProblemError("custom instances cannot be generated");
    }
    problem.seed = seed;
    return problem;
}

}  // namespace gqw
