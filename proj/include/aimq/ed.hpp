#pragma once

#include <optional>

#include "aimq/emulator.hpp"
#include "aimq/gf.hpp"
#include "aimq/pauli.hpp"

namespace aimq {

struct EdResult {
    double energy = 0.0;
    Statevector ground_state;
    std::optional<Eigen::VectorXd> spectrum;  // dense path only
};

struct EdOptions {
    int dense_limit = 12;   // qubits; above this an iterative solver is used
    unsigned seed = 7;      // start vector for the iterative path
    int max_iterations = 60;
    int subspace = 40;
    double tol = 1e-11;
    bool keep_spectrum = false;
};

/// Lowest eigenpair of a Pauli hamiltonian; dense below `dense_limit`, matrix-free
/// restarted Lanczos above it (deterministic given the seed).
EdResult ed_ground_state(const PauliHamiltonian& h, const EdOptions& opts = {});

/// Exact branch GF by Hilbert-space Lanczos from the ladder-applied ground state,
/// with full reorthogonalization; prefactor = ||phi_0||^2.
ContinuedFraction ed_green_function(const EdResult& res, const PauliHamiltonian& h, int alpha,
                                    GfBranch branch, int max_depth = 200);

/// Same, from an explicitly prepared phi_0 (off-diagonal combinations).
ContinuedFraction ed_green_function_from_phi0(const EdResult& res, const PauliHamiltonian& h,
                                              const Statevector& phi0, GfBranch branch,
                                              int max_depth = 200);

}  // namespace aimq
