#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace aimq {

using cdouble = std::complex<double>;

/// Sparse Pauli string: sorted (qubit, letter) pairs with letters in {X,Y,Z}.
/// Identity factors are not stored.
struct PauliString {
    std::vector<std::pair<int, char>> ops;

    bool operator==(const PauliString&) const = default;
    bool operator<(const PauliString& other) const { return ops < other.ops; }

    int max_qubit() const;
    std::string str(int n_qubits) const;
};

/// Multiply two Pauli strings; returns the phase (in {1,i,-1,-i}) and the product string.
std::pair<cdouble, PauliString> multiply(const PauliString& a, const PauliString& b);

struct PauliTerm {
    cdouble coeff;
    PauliString string;
};

/// Weighted sum of Pauli strings on n_qubits qubits.
struct PauliHamiltonian {
    int n_qubits = 0;
    std::vector<PauliTerm> terms;

    /// Merge identical strings, drop coefficients below cutoff.
    void simplify(double cutoff = 1e-14);

    PauliHamiltonian& operator+=(const PauliHamiltonian& other);
    PauliHamiltonian operator*(const PauliHamiltonian& other) const;

    bool is_hermitian(double tol = 1e-12) const;

    /// Dense matrix, little-endian (qubit 0 = least significant bit).
    Eigen::MatrixXcd to_dense() const;

    /// Matrix-free application to a statevector of length 2^n_qubits.
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
};

/// One fermionic creation/annihilation factor acting on a spin-orbital.
struct FermionOp {
    int orbital;
    bool dagger;
};

/// coefficient * product of ladder operators (left to right application order as written).
struct FermionTerm {
    cdouble coeff;
    std::vector<FermionOp> ops;

    FermionTerm dagger() const;
};

/// Jordan-Wigner image of a single fermionic term:
/// c^dag_p -> (X_p - iY_p)/2 * prod_{q<p} Z_q, expanded and simplified.
PauliHamiltonian jordan_wigner(const FermionTerm& term, int n_qubits);

/// Jordan-Wigner image of a sum of fermionic terms.
PauliHamiltonian jordan_wigner(const std::vector<FermionTerm>& terms, int n_qubits);

/// Total-number operator sum_p n_p as a Pauli hamiltonian.
PauliHamiltonian number_operator(int n_qubits);

}  // namespace aimq
