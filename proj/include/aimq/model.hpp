#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aimq/pauli.hpp"

namespace aimq {

/// Anderson impurity model instance. Energies in eV.
struct AimModel {
    int n_imp = 1;
    int n_bath = 0;
    Eigen::MatrixXcd eps_imp;   // n_imp x n_imp, Hermitian
    double U = 0.0;
    double J = 0.0;
    Eigen::MatrixXcd eps_bath;  // n_bath x n_bath, Hermitian
    Eigen::MatrixXcd V;         // n_imp x n_bath

    int n_sites() const { return n_imp + n_bath; }
    int n_spin_orbitals() const { return 2 * n_sites(); }

    /// throws std::invalid_argument when dimensions or hermiticity are violated
    void validate() const;

    /// one-particle hopping matrix over sites (impurity block first, then bath)
    Eigen::MatrixXcd hopping_matrix() const;
};

/// H = H0 (quadratic) + Hint (impurity-only interaction), Appendix-style split.
struct HamiltonianSplit {
    Eigen::MatrixXcd h0_single_particle;  // 2(n_imp+n_bath) square, spin-block-diagonal
    std::vector<FermionTerm> hint_terms;  // supported on impurity spin-orbitals only
    int n_imp = 0;
    int n_sites = 0;
};

/// spin: 0 = up, 1 = down. Up block first, sites ordered impurity-first.
int spin_orbital_index(int site, int spin, int n_sites);

/// Hubbard-Kanamori interaction terms: density-density (U, U-2J, U-3J),
/// spin-flip and pair-hopping, Hermitian as a sum.
std::vector<FermionTerm> kanamori_terms(double U, double J, int n_imp, int n_sites);

/// Full AIM Hamiltonian as one-particle terms + Kanamori terms, as fermion terms.
std::vector<FermionTerm> aim_fermion_terms(const AimModel& model);

/// Jordan-Wigner Pauli form together with the H0/Hint split.
std::pair<PauliHamiltonian, HamiltonianSplit> build_hamiltonian(const AimModel& model);

/// JW Pauli hamiltonian of the quadratic part alone (for tests / splits).
PauliHamiltonian quadratic_pauli(const Eigen::MatrixXcd& h_single_particle);

/// Block-Lanczos reduction to block-tridiagonal form with n_imp x n_imp blocks.
/// Returns (transformed matrix, unitary Q with transformed = Q^dag * hopping * Q).
/// Q acts as identity on the leading impurity block.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> block_tridiagonalize(
    const Eigen::MatrixXcd& hopping, int n_imp);

}  // namespace aimq
