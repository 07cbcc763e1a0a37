#include "aimq/ed.hpp"

#include <Eigen/Eigenvalues>
#include <random>
#include <stdexcept>

namespace aimq {

EdResult ed_ground_state(const PauliHamiltonian& h, const EdOptions& opts) {
    const int n = h.n_qubits;
    if (n < 1 || n > kDenseQubitLimit) throw std::invalid_argument("ed_ground_state: size limit exceeded");
    EdResult out;
    out.ground_state = Statevector(n);
    if (n <= opts.dense_limit) {
        Eigen::MatrixXcd hd = h.to_dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((hd + hd.adjoint()) / 2.0);
        out.energy = es.eigenvalues()[0];
        out.ground_state.amplitudes = es.eigenvectors().col(0);
        if (opts.keep_spectrum) out.spectrum = es.eigenvalues();
        return out;
    }
    // matrix-free restarted Lanczos with full reorthogonalization
    const std::int64_t dim = std::int64_t(1) << n;
    std::mt19937 rng(opts.seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) v[i] = cdouble(nd(rng), nd(rng));
    v /= v.norm();
    double energy = 0.0;
    double hscale = 0.0;
    for (const auto& t : h.terms) hscale += std::abs(t.coeff);
    for (int restart = 0; restart < opts.max_iterations; ++restart) {
        Eigen::MatrixXcd basis(dim, opts.subspace);
        basis.col(0) = v;
        std::vector<double> alpha, beta;
        int m = 0;
        for (int k = 0; k < opts.subspace; ++k) {
            m = k + 1;
            Eigen::VectorXcd w = h.apply(basis.col(k));
            alpha.push_back(std::real(basis.col(k).dot(w)));
            auto built = basis.leftCols(m);
            w.noalias() -= built * (built.adjoint() * w).eval();
            w.noalias() -= built * (built.adjoint() * w).eval();
            const double b = w.norm();
            if (b < 1e-13 * std::max(1.0, hscale) || k == opts.subspace - 1) break;
            beta.push_back(b);
            basis.col(k + 1) = w / b;
        }
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[size_t(i)];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[size_t(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        Eigen::VectorXcd next = basis.leftCols(m) * es.eigenvectors().col(0).cast<cdouble>();
        next /= next.norm();
        energy = es.eigenvalues()[0];
        v = next;
        const double resid = (h.apply(v) - energy * v).norm();
        if (resid < opts.tol * std::max(1.0, hscale)) break;
    }
    out.energy = energy;
    out.ground_state.amplitudes = v;
    return out;
}

namespace {

ContinuedFraction hilbert_lanczos(const PauliHamiltonian& h, const Statevector& phi0, double e_ref,
                                  GfBranch branch, int max_depth) {
    ContinuedFraction cf;
    cf.branch = branch;
    cf.e_ref = e_ref;
    cf.prefactor = std::pow(phi0.norm(), 2);
    if (cf.prefactor < 1e-14) {
        cf.prefactor = 0.0;
        return cf;
    }
    Eigen::VectorXcd v = phi0.amplitudes / phi0.norm();
    double bmax = 0.0;
    const int depth = int(std::min<std::int64_t>(max_depth, phi0.dim()));
    Eigen::MatrixXcd basis(v.size(), depth);
    basis.col(0) = v;
    int m = 1;
    for (int it = 0; it < depth; ++it) {
        Eigen::VectorXcd w = h.apply(basis.col(it)) - e_ref * basis.col(it);
        cf.a.push_back(std::real(basis.col(it).dot(w)));
        if (it == depth - 1) break;
        auto built = basis.leftCols(m);
        w.noalias() -= built * (built.adjoint() * w).eval();
        w.noalias() -= built * (built.adjoint() * w).eval();
        const double b = w.norm();
        const double b2 = b * b;
        bmax = std::max(bmax, b2);
        if (b2 < 1e-12 * std::max(bmax, 1e-12)) break;
        cf.b_sq.push_back(b2);
        basis.col(it + 1) = w / b;
        m = it + 2;
    }
    return cf;
}

}  // namespace

ContinuedFraction ed_green_function(const EdResult& res, const PauliHamiltonian& h, int alpha,
                                    GfBranch branch, int max_depth) {
    Statevector phi0 = apply_ladder(alpha, branch == GfBranch::Greater, res.ground_state);
    return hilbert_lanczos(h, phi0, res.energy, branch, max_depth);
}

ContinuedFraction ed_green_function_from_phi0(const EdResult& res, const PauliHamiltonian& h,
                                              const Statevector& phi0, GfBranch branch,
                                              int max_depth) {
    return hilbert_lanczos(h, phi0, res.energy, branch, max_depth);
}

}  // namespace aimq
