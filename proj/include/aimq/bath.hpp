#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "aimq/model.hpp"

namespace aimq {

/// frequency weighting of the fit residuals; InverseOmega weights the squared
/// residual at omega_n by 1/omega_n (reproduces the reference Bethe fits),
/// Uniform uses the plain Frobenius distance.
enum class MatsubaraWeight { InverseOmega, Uniform };

/// Continuous hybridization to fit on the Matsubara axis.
struct HybridizationTarget {
    std::function<Eigen::MatrixXcd(cdouble)> evaluator;  // z -> n_imp x n_imp matrix
    int n_imp = 1;
    double beta_f = 100.0;  // fictitious inverse temperature, eV^-1
    int n_matsubara = 100;
    MatsubaraWeight weighting = MatsubaraWeight::InverseOmega;
};

struct BathParams {
    Eigen::MatrixXcd eps_bath;  // n_bath x n_bath Hermitian (diagonal for fits)
    Eigen::MatrixXcd V;         // n_imp x n_bath
};

struct FitResult {
    BathParams bath;
    double distance = 0.0;  // D = sum_n ||Delta_disc - Delta_target||_F^2
    bool converged = true;
};

/// omega_n = (2n + 1) pi / beta_f, n = 0..n_M-1
std::vector<double> matsubara_grid(double beta_f, int n_matsubara);

/// Delta(z) = V (z - eps_bath)^{-1} V^dag
Eigen::MatrixXcd discrete_hybridization(const BathParams& bath, cdouble z);

/// Hilbert transform of the semicircular Bethe density
/// (1/2pi) sqrt(4 - w^2): closed form (z - sqrt(z-2) sqrt(z+2)) / 2.
cdouble bethe_hybridization_matsubara(cdouble z);

/// Least-squares bath discretization on the Matsubara grid; multi-start
/// Levenberg-Marquardt in the pole parameterization (diagonal eps, real V).
/// For n_imp > 1 each diagonal channel is fitted independently and n_bath must
/// be divisible by n_imp.
FitResult fit_bath(const HybridizationTarget& target, int n_bath, int restarts, unsigned seed);

struct DmftState {
    int iteration = 0;
    BathParams bath;
    std::vector<cdouble> g_imp;  // impurity GF on the Matsubara grid
    double distance = 0.0;       // bath-fit residual
    double gf_change = 0.0;      // max |G_new - G_old| from the previous step
};

struct DmftOptions {
    double u = 4.0;
    double beta_f = 100.0;
    int n_matsubara = 100;
    int n_bath = 7;
    int fit_restarts = 32;
    unsigned seed = 1;
    double mixing = 0.7;        // weight of the new GF in the hybridization update
    double conv_tol = 1e-5;     // max |G_new - G_old|
    int max_iterations = 30;
};

/// impurity solver handle: model -> G(i omega_n) on the given grid
using ImpuritySolver =
    std::function<std::vector<cdouble>(const AimModel&, const std::vector<double>&)>;

/// ED-backed impurity solver (exact within the discretized model).
ImpuritySolver make_ed_impurity_solver();

/// single Bethe-lattice DMFT update: solve the impurity model for the current
/// bath, set the new hybridization target Delta = G (with linear mixing), refit.
DmftState dmft_step(const DmftState& state, const ImpuritySolver& solver, const DmftOptions& opts);

struct DmftResult {
    DmftState state;
    bool converged = false;
    int iterations = 0;
    std::vector<double> gf_changes;
};

/// full Bethe-lattice loop at half filling (eps_imp = -U/2), starting from the
/// fit of the noninteracting hybridization.
DmftResult dmft_loop(const ImpuritySolver& solver, const DmftOptions& opts);

/// AIM instance for a fitted bath at half filling
AimModel model_from_bath(const BathParams& bath, double u, double eps_imp);

}  // namespace aimq
