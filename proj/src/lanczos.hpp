#pragma once

#include "gqw/engine.hpp"

namespace gqw::detail {

/// Lowest k distinct eigenvalues of gamma * H_D + diag(energies) by restarted
/// Lanczos with full reorthogonalization.
InstantaneousSpectrum lanczos_lowest(std::span<const double> energies, unsigned n_qubits,
                                     double gamma, std::size_t k, bool want_vectors);

}  // namespace gqw::detail
