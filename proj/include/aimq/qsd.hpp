#pragma once

#include <Eigen/Dense>

#include "aimq/circuit.hpp"
#include "aimq/pauli.hpp"

namespace aimq {

/// Cartan (KAK) decomposition of a two-qubit unitary:
/// u = phase * (k1b (x) k1a) * exp(i (a XX + b YY + c ZZ)) * (k2b (x) k2a),
/// k*a acting on qubit 0, k*b on qubit 1. Angles are not chamber-reduced.
struct KakDecomposition {
    Eigen::Matrix2cd k1a, k1b, k2a, k2b;
    double a = 0, b = 0, c = 0;
    cdouble phase = 1.0;
};

KakDecomposition kak_decompose(const Eigen::Matrix4cd& u);

/// exp(i (a XX + b YY + c ZZ))
Eigen::Matrix4cd canonical_gate(double a, double b, double c);

/// Synthesize an arbitrary two-qubit unitary into 1q rotations and CNOTs on
/// qubits (0, 1), up to global phase. 0-3 CNOTs depending on the interaction class.
Circuit synthesize_2q(const Eigen::Matrix4cd& u);

/// ZYZ synthesis of a one-qubit unitary (up to phase) on the given qubit.
void append_1q_zyz(Circuit& c, int qubit, const Eigen::Matrix2cd& u);

/// Quantum Shannon Decomposition of a k-qubit unitary into rotations and CNOTs
/// on qubits 0..k-1, up to global phase. k limited by `max_qubits`.
Circuit qsd_decompose(const Eigen::MatrixXcd& u, int max_qubits = 8);

/// Appendix-formula CNOT count of one n_g-qubit gate under the optimized QSD:
/// (23/48) 4^n - (3/2) 2^n + 4/3, rounded.
long cnot_count_optimized_qsd(int n_g);

/// Depth in non-parallel CNOTs of a staircase circuit:
/// ((n_l - 1) n_g + (n_q - n_g + 1)) * N_CNOT(n_g).
long staircase_depth(int n_layers, int n_g, int n_q);

}  // namespace aimq
