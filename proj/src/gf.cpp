#include "aimq/gf.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace aimq {

KrylovData build_krylov_matrices(const Statevector& gs, double e_ref, int alpha, GfBranch branch,
                                 const QsegConfig& cfg, const TrotterPropagator& prop,
                                 const PauliHamiltonian& h) {
    Statevector phi0 = apply_ladder(alpha, branch == GfBranch::Greater, gs);
    KrylovData k = build_krylov_matrices_from_phi0(phi0, e_ref, branch, cfg, prop, h);
    k.orbital = alpha;
    return k;
}

KrylovData build_krylov_matrices_from_phi0(const Statevector& phi0, double e_ref, GfBranch branch,
                                           const QsegConfig& cfg, const TrotterPropagator& prop,
                                           const PauliHamiltonian& h) {
    if (cfg.n_l < 0) throw std::invalid_argument("build_krylov_matrices: n_l must be >= 0");
    if (std::abs(prop.dt() - cfg.dt) > 1e-12 || prop.n_trotter() != cfg.n_trotter)
        throw std::invalid_argument("build_krylov_matrices: propagator does not match config");
    KrylovData k;
    k.branch = branch;
    k.e_ref = e_ref;
    k.b0_sq = std::pow(phi0.norm(), 2);
    const int nl = cfg.n_l;
    const int dim = 2 * nl + 1;
    if (k.b0_sq < 1e-12) {
        k.degenerate = true;
        k.S = Eigen::MatrixXcd::Zero(dim, dim);
        k.H = Eigen::MatrixXcd::Zero(dim, dim);
        return k;
    }

    if (!cfg.toeplitz_h) {
        // basis states psi_k = U^k phi_0, k in [-n_l, n_l]; S from the first column
        // (Toeplitz exactly), H from all pairs via H psi_j
        std::vector<Statevector> states(size_t(dim), phi0);
        for (int j = 1; j <= nl; ++j) {
            states[size_t(nl + j)] = prop.apply(states[size_t(nl + j - 1)]);
            states[size_t(nl - j)] = prop.apply(states[size_t(nl - j + 1)], /*inverse=*/true);
        }
        // overlaps s_d = <phi0| U^d |phi0> for d in [-2 n_l, 2 n_l]
        std::vector<cdouble> sdiag(size_t(4 * nl + 1));
        Statevector fwd = phi0, bwd = phi0;
        sdiag[size_t(2 * nl)] = overlap(phi0, phi0);
        for (int d = 1; d <= 2 * nl; ++d) {
            fwd = prop.apply(fwd);
            bwd = prop.apply(bwd, true);
            sdiag[size_t(2 * nl + d)] = overlap(phi0, fwd);
            sdiag[size_t(2 * nl - d)] = overlap(phi0, bwd);
        }
        k.S.resize(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) k.S(i, j) = sdiag[size_t(2 * nl + (j - i))];
        k.H.resize(dim, dim);
        std::vector<Statevector> hstates;
        hstates.reserve(size_t(dim));
        for (int j = 0; j < dim; ++j) hstates.push_back(apply_pauli_sum(h, states[size_t(j)]));
        for (int i = 0; i < dim; ++i) {
            for (int j = i; j < dim; ++j) {
                const cdouble v = overlap(states[size_t(i)], hstates[size_t(j)]);
                k.H(i, j) = v;
                if (j != i) k.H(j, i) = std::conj(v);
            }
        }
        // enforce hermiticity of the diagonal
        for (int i = 0; i < dim; ++i) k.H(i, i) = k.H(i, i).real();
    } else {
        // Toeplitz approximation: H_ij ~ <phi0| H U^{j-i} |phi0>, S as before;
        // only 2(2 n_l) propagator applications in total
        std::vector<cdouble> sdiag(size_t(4 * nl + 1)), hdiag(size_t(4 * nl + 1));
        Statevector hphi = apply_pauli_sum(h, phi0);
        Statevector fwd = phi0, bwd = phi0;
        sdiag[size_t(2 * nl)] = overlap(phi0, phi0);
        hdiag[size_t(2 * nl)] = overlap(hphi, phi0);
        for (int d = 1; d <= 2 * nl; ++d) {
            fwd = prop.apply(fwd);
            bwd = prop.apply(bwd, true);
            sdiag[size_t(2 * nl + d)] = overlap(phi0, fwd);
            sdiag[size_t(2 * nl - d)] = overlap(phi0, bwd);
            hdiag[size_t(2 * nl + d)] = overlap(hphi, fwd);
            hdiag[size_t(2 * nl - d)] = overlap(hphi, bwd);
        }
        k.S.resize(dim, dim);
        k.H.resize(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                k.S(i, j) = sdiag[size_t(2 * nl + (j - i))];
                k.H(i, j) = hdiag[size_t(2 * nl + (j - i))];
            }
        }
        // symmetrize to restore hermiticity broken by the approximation
        k.H = ((k.H + k.H.adjoint()) / 2.0).eval();
    }
    return k;
}

ContinuedFraction lanczos_from_matrices(const KrylovData& k, double reg) {
    ContinuedFraction cf;
    cf.branch = k.branch;
    cf.e_ref = k.e_ref;
    cf.prefactor = k.b0_sq;
    if (k.degenerate) {
        cf.prefactor = 0.0;
        return cf;
    }
    if (reg <= 0 || reg >= 1) throw std::invalid_argument("lanczos_from_matrices: bad regularization");
    const int dim = int(k.S.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((k.S + k.S.adjoint()) / 2.0);
    const double lmax = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-6 * lmax)
        throw std::runtime_error("lanczos_from_matrices: S is not positive semidefinite");
    std::vector<int> keep;
    for (int i = 0; i < dim; ++i)
        if (es.eigenvalues()[i] > reg * lmax) keep.push_back(i);
    const int r = int(keep.size());
    Eigen::MatrixXcd y(dim, r);
    for (int c = 0; c < r; ++c)
        y.col(c) = es.eigenvectors().col(keep[size_t(c)]) / std::sqrt(es.eigenvalues()[keep[size_t(c)]]);
    // orthonormalized projected operator and start vector
    const Eigen::MatrixXcd hs = k.H - k.e_ref * k.S;
    Eigen::MatrixXcd ho = y.adjoint() * hs * y;
    ho = ((ho + ho.adjoint()) / 2.0).eval();
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(dim);
    e0[(dim - 1) / 2] = 1.0;  // phi_0 sits at k = 0
    Eigen::VectorXcd v = y.adjoint() * (k.S * e0);
    const double vn = v.norm();
    if (vn < 1e-14) {
        cf.prefactor = 0.0;
        return cf;
    }
    v /= vn;

    // full-reorthogonalization Lanczos on ho
    std::vector<Eigen::VectorXcd> basis;
    basis.push_back(v);
    Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(r);
    double bmax = 0.0;
    for (int it = 0; it < r; ++it) {
        Eigen::VectorXcd w = ho * basis.back();
        const double a = std::real(basis.back().dot(w));
        cf.a.push_back(a);
        if (it == r - 1) break;
        for (const auto& u : basis) w -= u.dot(w) * u;
        for (const auto& u : basis) w -= u.dot(w) * u;
        const double b = w.norm();
        const double b2 = b * b;
        bmax = std::max(bmax, b2);
        if (b2 < 1e-12 * std::max(bmax, 1e-12)) break;  // Lanczos breakdown: truncate the fraction
        cf.b_sq.push_back(b2);
        basis.push_back(w / b);
    }
    return cf;
}

cdouble eval_continued_fraction(const ContinuedFraction& cf, cdouble z) {
    if (cf.prefactor == 0.0 || cf.a.empty()) return 0.0;
    const double s = (cf.branch == GfBranch::Greater) ? 1.0 : -1.0;
    cdouble tail = 0.0;
    for (int i = int(cf.a.size()) - 1; i >= 1; --i) {
        const cdouble den = z - s * cf.a[size_t(i)] - tail;
        if (std::abs(den) < 1e-300) throw std::runtime_error("eval_continued_fraction: pole hit");
        tail = cf.b_sq[size_t(i) - 1] / den;
    }
    const cdouble den = z - s * cf.a[0] - tail;
    if (std::abs(den) < 1e-300) throw std::runtime_error("eval_continued_fraction: pole hit");
    return cf.prefactor / den;
}

cdouble retarded_gf(const ContinuedFraction& greater, const ContinuedFraction& lesser, cdouble z) {
    return eval_continued_fraction(greater, z) + eval_continued_fraction(lesser, z);
}

DosCurve dos(const std::function<cdouble(cdouble)>& retarded, const std::vector<double>& grid,
             double delta) {
    if (delta <= 0) throw std::invalid_argument("dos: delta must be > 0");
    DosCurve out;
    out.delta = delta;
    out.omega = grid;
    out.dos.reserve(grid.size());
    for (double w : grid) out.dos.push_back(-retarded(cdouble(w, delta)).imag() / M_PI);
    return out;
}

std::vector<double> default_omega_grid(double lo, double hi, int points) {
    std::vector<double> g(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) g[size_t(i)] = lo + (hi - lo) * i / double(points - 1);
    return g;
}

cdouble offdiagonal_gf(const ContinuedFraction& g1, const ContinuedFraction& g2,
                       const ContinuedFraction& diag_a, const ContinuedFraction& diag_b, cdouble z) {
    if (g1.branch != g2.branch || g1.branch != diag_a.branch || g1.branch != diag_b.branch)
        throw std::invalid_argument("offdiagonal_gf: branches differ");
    if (std::abs(g1.e_ref - g2.e_ref) > 1e-10 || std::abs(g1.e_ref - diag_a.e_ref) > 1e-10 ||
        std::abs(g1.e_ref - diag_b.e_ref) > 1e-10)
        throw std::invalid_argument("offdiagonal_gf: energy references differ");
    const cdouble i(0, 1);
    const cdouble v1 = eval_continued_fraction(g1, z);
    const cdouble v2 = eval_continued_fraction(g2, z);
    const cdouble va = eval_continued_fraction(diag_a, z);
    const cdouble vb = eval_continued_fraction(diag_b, z);
    return 0.5 * (v1 - i * v2 + (i - 1.0) * (va + vb));
}

}  // namespace aimq
