#pragma once

#include <optional>
#include <vector>

#include "aimq/circuit.hpp"
#include "aimq/mps.hpp"
#include "aimq/qsd.hpp"

namespace aimq {

struct CompileReport {
    double fidelity = 0.0;            // |<target|prepared>|^2
    double energy_qc = 0.0;           // <H> of the prepared state when a Hamiltonian is given
    bool has_energy = false;
    long cnot_count = 0;              // formula-based estimate for unitary-block circuits
    long depth = 0;                   // non-parallel CNOT layers (formula for staircases)
    int n_layers = 0;
    int n_gate_qubits = 0;
    std::vector<double> fidelity_trace;  // per accepted sweep / layer event
    bool flagged = false;             // set when a target could not be reached
    std::string message;
};

/// Exact decomposition of an MPS into a ladder of multi-qubit unitaries.
/// Gate for bond i acts on ceil(log2 chi_i) + 1 contiguous qubits; applying the
/// circuit to |0...0> reproduces the state.
Circuit exact_ladder(const Mps& state);

/// Closest-unitary update: for an environment O the unitary W maximizing
/// Re tr(W^dag O), i.e. the polar factor of O. Zero environments return the
/// identity and set *degenerate when given.
Eigen::MatrixXcd local_optimal_update(const Eigen::MatrixXcd& environment,
                                      bool* degenerate = nullptr);

struct VariationalOptions {
    int n_g = 2;
    int max_layers = 12;
    double sweep_tol = 1e-6;      // absolute fidelity improvement per sweep
    double f_target = 1.0;        // stop early when reached
    int max_sweeps_per_layer = 60;
    int chi_factor = 4;           // reverse-application bond cap = chi_factor * target chi
    const Mpo* hamiltonian = nullptr;  // optional, fills energy_qc
    /// when set, stop as soon as the fidelity enters [f_window_lo, f_target]
    std::optional<double> f_window_lo;
};

/// Staircase-ansatz compilation of `target` into layers of n_g-qubit unitary
/// blocks by sequential locally-optimal gate updates.
std::pair<Circuit, CompileReport> variational_compile(const Mps& target,
                                                      const VariationalOptions& opts);

struct HybridOptions {
    double f_target = 0.99;
    int max_gates_per_block = 64;
    double sweep_tol = 1e-9;
    int max_sweeps = 40;
    const Mpo* hamiltonian = nullptr;
};

/// Block-by-block compilation through the intermediate states of the exact
/// ladder, each block approximated variationally with two-qubit gates.
std::pair<Circuit, CompileReport> hybrid_compile(const Mps& target, const HybridOptions& opts);

/// Expand a ladder/staircase circuit of unitary blocks into rotations + CNOTs.
Circuit lower_to_elementary(const Circuit& blocks, int max_block_qubits = 8);

}  // namespace aimq
