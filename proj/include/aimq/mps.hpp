#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "aimq/pauli.hpp"

namespace aimq {

/// Matrix product state over qubits (physical dimension 2).
/// tensors[i][s] is the chi_{i-1} x chi_i matrix for physical value s.
/// Site i corresponds to qubit i (little-endian statevector convention).
struct Mps {
    std::vector<std::array<Eigen::MatrixXcd, 2>> tensors;
    int canonical_center = -1;  // -1: no canonical structure guaranteed

    int n_sites() const { return int(tensors.size()); }
    /// interior bond dimensions chi_1..chi_{N-1} (boundaries are 1)
    std::vector<int> bond_dims() const;
    int max_bond_dim() const;

    double norm() const;
    void normalize();

    static Mps zero_state(int n);
    static Mps product_state(const std::vector<Eigen::Vector2cd>& amps);
    static Mps random_state(int n, int chi, unsigned seed);
};

cdouble overlap(const Mps& bra, const Mps& ket);
double fidelity(const Mps& a, const Mps& b);

/// Gauge the state into mixed canonical form around `center`; preserves the
/// state as a vector. Result is normalized if the input was (gauge only).
Mps canonicalize(const Mps& state, int center);

/// SVD truncation of every bond to chi_max followed by single-site
/// fidelity-maximizing sweeps against the original state.
/// Returns the normalized truncated state and |<trunc|orig>|^2.
std::pair<Mps, double> truncate(const Mps& state, int chi_max, int fidelity_sweeps);

Eigen::VectorXcd to_statevector(const Mps& state, int dense_limit = 20);
Mps from_statevector(const Eigen::VectorXcd& psi, double cutoff = 1e-12, int chi_max = 1 << 20);

/// Matrix product operator; tensors[i] holds a (Dl x Dr) grid of 2x2 blocks,
/// op(a, b) = 2x2 operator for bond channels a -> b.
struct Mpo {
    struct Site {
        int dl = 1, dr = 1;
        std::vector<Eigen::Matrix2cd> ops;  // index a * dr + b
        Eigen::Matrix2cd& at(int a, int b) { return ops[size_t(a) * dr + b]; }
        const Eigen::Matrix2cd& at(int a, int b) const { return ops[size_t(a) * dr + b]; }
    };
    std::vector<Site> sites;
    int n_sites() const { return int(sites.size()); }
    std::vector<int> bond_dims() const;
};

/// Build an MPO for a Pauli sum (finite-state construction) and compress it by
/// SVD sweeps. Exact to ~1e-12 on small systems by construction.
Mpo mpo_from_pauli(const PauliHamiltonian& h, double compress_cutoff = 1e-13);

Eigen::MatrixXcd mpo_to_dense(const Mpo& op);  // small systems only

double mps_expectation(const Mpo& op, const Mps& state);
/// <H^2> - <H>^2 for a normalized state
double mps_variance(const Mpo& op, const Mps& state);

struct DmrgOptions {
    int chi_max = 64;
    int max_sweeps = 24;
    double tol = 1e-10;          // energy change per sweep
    unsigned seed = 1234;
    int init_chi = 8;
    double svd_cutoff = 1e-14;   // relative discard during splits
};

struct DmrgReport {
    std::vector<double> sweep_energies;
    double energy = 0.0;
    double variance = 0.0;
    int max_bond_dim = 0;
    bool converged = false;
};

/// Two-site DMRG ground-state search with a Lanczos local eigensolver.
std::pair<Mps, DmrgReport> dmrg_ground_state(const Mpo& ham, const DmrgOptions& opts);

/// Contiguous window of an MPS merged to a dense tensor amp((l * 2^w + s), r).
struct WindowTensor {
    Eigen::MatrixXcd amp;
    int chi_l = 1, chi_r = 1, width = 0;
};

/// Merge sites [first, first+width); the state must be (and is left) gauged so
/// that the window carries the full norm (mixed canonical inside the window).
WindowTensor merge_window(Mps& state, int first, int width);

/// Split a window tensor back into sites [first, first+width). Returns false
/// and leaves the state unchanged when a bond would exceed chi_max.
bool replace_window(Mps& state, int first, int width, const WindowTensor& wt, int chi_max,
                    double cutoff = 1e-14);

/// Apply a k-qubit unitary on contiguous qubits [first, first+k) to the MPS.
/// Returns false on bond overflow past chi_max.
bool apply_unitary_to_mps(Mps& state, int first, const Eigen::MatrixXcd& u, int chi_max,
                          double cutoff = 1e-14);

/// Left (right) overlap environments E_i of <bra|ket>: E[i] is the chi^bra x chi^ket
/// contraction of everything strictly left of site i (right of site i).
std::vector<Eigen::MatrixXcd> overlap_left_envs(const Mps& bra, const Mps& ket);
std::vector<Eigen::MatrixXcd> overlap_right_envs(const Mps& bra, const Mps& ket);

}  // namespace aimq
