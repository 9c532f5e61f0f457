#include "lanczos.hpp"

#include "gqw/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace gqw::detail {

namespace {

using Vec = Eigen::VectorXd;

void apply_hamiltonian(std::span<const double> energies, unsigned n, double gamma, const Vec& in,
                       Vec& out) {
    const auto dim = static_cast<std::int64_t>(energies.size());
#pragma omp parallel for schedule(static) if (dim >= (1 << 14))
    for (std::int64_t z = 0; z < dim; ++z) {
        double hop = 0.0;
        for (unsigned j = 0; j < n; ++j) hop += in(z ^ (std::int64_t{1} << j));
        out(z) = energies[static_cast<std::size_t>(z)] * in(z) - gamma * hop;
    }
}

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace

InstantaneousSpectrum lanczos_lowest(std::span<const double> energies, unsigned n_qubits,
                                     double gamma, std::size_t k, bool want_vectors) {
    const auto dim = static_cast<Eigen::Index>(energies.size());
    const Eigen::Index basis_cap =
        std::min<Eigen::Index>(dim, std::max<Eigen::Index>(120, 4 * static_cast<Eigen::Index>(k) + 40));
    constexpr int kMaxRestarts = 30;

    Rng rng(0x5eed1a2c705ULL);
    Vec start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = rng.uniform(-1.0, 1.0);

    Eigen::MatrixXd basis(dim, basis_cap);
    Vec w(dim);
    InstantaneousSpectrum out;

    for (int restart = 0; restart <= kMaxRestarts; ++restart) {
        start.normalize();
        std::vector<double> alpha, beta;
        Eigen::Index m = 0;
        basis.col(0) = start;
        for (; m < basis_cap; ++m) {
            apply_hamiltonian(energies, n_qubits, gamma, basis.col(m), w);
            alpha.push_back(basis.col(m).dot(w));
            // Two passes of classical Gram-Schmidt against the whole basis.
            for (int pass = 0; pass < 2; ++pass) {
                const Vec c = basis.leftCols(m + 1).transpose() * w;
                w.noalias() -= basis.leftCols(m + 1) * c;
            }
            const double b = w.norm();
            if (m + 1 == basis_cap || b <= 1e-12 * std::max(1.0, std::abs(alpha.back()))) {
                beta.push_back(b);
                ++m;
                break;
            }
            beta.push_back(b);
            basis.col(m + 1) = w / b;
        }

        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            tri(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tri);
        const double b_last = beta.back();
        const bool invariant = m == dim || b_last <= 1e-12;

        out = {};
        bool converged = true;
        Vec next = Vec::Zero(dim);
        for (Eigen::Index i = 0; i < m && out.eigenvalues.size() < k; ++i) {
            const double v = solver.eigenvalues()(i);
            if (!out.eigenvalues.empty() && same_level(v, out.eigenvalues.back())) continue;
            const double resid = std::abs(b_last * solver.eigenvectors()(m - 1, i));
            const Vec ritz = basis.leftCols(m) * solver.eigenvectors().col(i);
            if (!invariant && resid > 1e-10 * std::max(1.0, std::abs(v))) converged = false;
            next += ritz;
            out.eigenvalues.push_back(v);
            if (want_vectors) out.eigenvectors.emplace_back(ritz.data(), ritz.data() + dim);
        }
        if (converged || restart == kMaxRestarts) break;
        // Keep a small random component so eigenspaces not yet seen can still appear.
        for (Eigen::Index i = 0; i < dim; ++i) next(i) += 1e-3 * rng.uniform(-1.0, 1.0);
        start = next;
    }
    return out;
}

}  // namespace gqw::detail
