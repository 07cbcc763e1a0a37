#pragma once

#include <functional>
#include <vector>

#include "aimq/emulator.hpp"
#include "aimq/pauli.hpp"

namespace aimq {

enum class GfBranch { Greater, Lesser };
enum class EnergyReference { MpsExact, Circuit };

struct QsegConfig {
    double dt = 0.05;        // eV^-1
    int n_l = 100;           // basis indices k in [-n_l, n_l]
    int n_trotter = 1;       // substeps per basis step
    bool toeplitz_h = false;
    double s_regularization = 1e-8;  // relative eigenvalue cutoff for S
    EnergyReference energy_reference = EnergyReference::MpsExact;
};

struct KrylovData {
    Eigen::MatrixXcd S;  // (2 n_l + 1)^2 overlap matrix, Toeplitz by construction
    Eigen::MatrixXcd H;  // Hamiltonian matrix elements
    GfBranch branch = GfBranch::Greater;
    int orbital = 0;
    double b0_sq = 0.0;  // <phi_0|phi_0> = S(0,0) before normalization
    double e_ref = 0.0;
    bool degenerate = false;  // phi_0 had zero norm; GF for the branch is 0
};

/// Continued fraction coefficients of a branch GF; a_i are coefficients of
/// (H - e_ref) in the Lanczos basis, so evaluation uses z -/+ a_i directly.
struct ContinuedFraction {
    std::vector<double> a;
    std::vector<double> b_sq;  // squared off-diagonal terms, b_sq[i] pairs with a[i+1]
    double prefactor = 0.0;    // b0^2 = <phi_0|phi_0>
    GfBranch branch = GfBranch::Greater;
    double e_ref = 0.0;
};

struct DosCurve {
    std::vector<double> omega;
    std::vector<double> dos;
    double delta = 0.1;
};

/// Krylov overlap and Hamiltonian matrices for the orbital's ladder state
/// phi_0 = c^dag_alpha |gs> (greater) or c_alpha |gs> (lesser).
KrylovData build_krylov_matrices(const Statevector& gs, double e_ref, int alpha, GfBranch branch,
                                 const QsegConfig& cfg, const TrotterPropagator& prop,
                                 const PauliHamiltonian& h);

/// Same, for an explicitly prepared (generally unnormalized) phi_0.
KrylovData build_krylov_matrices_from_phi0(const Statevector& phi0, double e_ref, GfBranch branch,
                                           const QsegConfig& cfg, const TrotterPropagator& prop,
                                           const PauliHamiltonian& h);

/// Generalized Lanczos in the S metric; regularizes S by dropping relative
/// eigenvalues below `reg`, tridiagonalizes the projected H - e_ref S.
ContinuedFraction lanczos_from_matrices(const KrylovData& k, double reg);

cdouble eval_continued_fraction(const ContinuedFraction& cf, cdouble z);

/// G_retarded = G_greater + G_lesser
cdouble retarded_gf(const ContinuedFraction& greater, const ContinuedFraction& lesser, cdouble z);

DosCurve dos(const std::function<cdouble(cdouble)>& retarded, const std::vector<double>& grid,
             double delta);

std::vector<double> default_omega_grid(double lo = -10.0, double hi = 10.0, int points = 2001);

/// Off-diagonal combination from the two auxiliary GFs
/// G1 built with (c_a + c_b) and G2 with (c_a + i c_b):
/// G_ab = (G1 - i G2 + (i - 1)(G_aa + G_bb)) / 2, same branch everywhere.
cdouble offdiagonal_gf(const ContinuedFraction& g1, const ContinuedFraction& g2,
                       const ContinuedFraction& diag_a, const ContinuedFraction& diag_b, cdouble z);

}  // namespace aimq
