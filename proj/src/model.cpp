#include "aimq/model.hpp"

#include <stdexcept>

namespace aimq {

void AimModel::validate() const {
    if (n_imp < 1) throw std::invalid_argument("AimModel: n_imp must be >= 1");
    if (n_bath < 0) throw std::invalid_argument("AimModel: n_bath must be >= 0");
    if (U < 0) throw std::invalid_argument("AimModel: U must be >= 0");
    if (eps_imp.rows() != n_imp || eps_imp.cols() != n_imp)
        throw std::invalid_argument("AimModel: eps_imp dimension mismatch");
    if (eps_bath.rows() != n_bath || eps_bath.cols() != n_bath)
        throw std::invalid_argument("AimModel: eps_bath dimension mismatch");
    if (n_bath > 0 && (V.rows() != n_imp || V.cols() != n_bath))
        throw std::invalid_argument("AimModel: V dimension mismatch");
    if ((eps_imp - eps_imp.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("AimModel: eps_imp not Hermitian");
    if (n_bath > 0 && (eps_bath - eps_bath.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("AimModel: eps_bath not Hermitian");
}

Eigen::MatrixXcd AimModel::hopping_matrix() const {
    const int M = n_sites();
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(M, M);
    T.topLeftCorner(n_imp, n_imp) = eps_imp;
    if (n_bath > 0) {
        T.bottomRightCorner(n_bath, n_bath) = eps_bath;
        T.topRightCorner(n_imp, n_bath) = V;
        T.bottomLeftCorner(n_bath, n_imp) = V.adjoint();
    }
    return T;
}

int spin_orbital_index(int site, int spin, int n_sites) {
    if (site < 0 || site >= n_sites) throw std::out_of_range("spin_orbital_index: site out of range");
    if (spin != 0 && spin != 1) throw std::out_of_range("spin_orbital_index: spin must be 0 or 1");
    return spin * n_sites + site;
}

namespace {

FermionOp cr(int p) { return {p, true}; }
FermionOp an(int p) { return {p, false}; }

// n_p n_q as a fermion monomial c^dag_p c_p c^dag_q c_q
FermionTerm density_density(double coeff, int p, int q) {
    return {coeff, {cr(p), an(p), cr(q), an(q)}};
}

}  // namespace

std::vector<FermionTerm> kanamori_terms(double U, double J, int n_imp, int n_sites) {
    if (n_imp < 1) throw std::invalid_argument("kanamori_terms: n_imp must be >= 1");
    std::vector<FermionTerm> out;
    auto so = [&](int site, int spin) { return spin_orbital_index(site, spin, n_sites); };
    for (int i = 0; i < n_imp; ++i) {
        if (U != 0.0) out.push_back(density_density(U, so(i, 0), so(i, 1)));
    }
    for (int i = 0; i < n_imp; ++i) {
        for (int j = 0; j < i; ++j) {
            for (int s = 0; s < 2; ++s) {
                if (U - 2 * J != 0.0) out.push_back(density_density(U - 2 * J, so(i, s), so(j, 1 - s)));
                if (U - 3 * J != 0.0) out.push_back(density_density(U - 3 * J, so(i, s), so(j, s)));
            }
            if (J != 0.0) {
                // spin flip: -J c^dag_{i s} c_{i sbar} c^dag_{j sbar} c_{j s}, both spin choices
                // (the two choices are mutual Hermitian conjugates)
                out.push_back({-J, {cr(so(i, 0)), an(so(i, 1)), cr(so(j, 1)), an(so(j, 0))}});
                out.push_back({-J, {cr(so(i, 1)), an(so(i, 0)), cr(so(j, 0)), an(so(j, 1))}});
                // pair hopping: -J c^dag_{i up} c^dag_{i dn} c_{j up} c_{j dn} + h.c.
                out.push_back({-J, {cr(so(i, 0)), cr(so(i, 1)), an(so(j, 0)), an(so(j, 1))}});
                out.push_back({-J, {cr(so(j, 0)), cr(so(j, 1)), an(so(i, 0)), an(so(i, 1))}});
            }
        }
    }
    return out;
}

std::vector<FermionTerm> aim_fermion_terms(const AimModel& model) {
    model.validate();
    const int M = model.n_sites();
    const Eigen::MatrixXcd T = model.hopping_matrix();
    std::vector<FermionTerm> out;
    for (int s = 0; s < 2; ++s) {
        for (int p = 0; p < M; ++p) {
            for (int q = 0; q < M; ++q) {
                if (std::abs(T(p, q)) < 1e-15) continue;
                out.push_back({T(p, q),
                               {cr(spin_orbital_index(p, s, M)), an(spin_orbital_index(q, s, M))}});
            }
        }
    }
    auto kan = kanamori_terms(model.U, model.J, model.n_imp, M);
    out.insert(out.end(), kan.begin(), kan.end());
    return out;
}

std::pair<PauliHamiltonian, HamiltonianSplit> build_hamiltonian(const AimModel& model) {
    model.validate();
    const int M = model.n_sites();
    const int nq = 2 * M;

    HamiltonianSplit split;
    split.n_imp = model.n_imp;
    split.n_sites = M;
    split.h0_single_particle = Eigen::MatrixXcd::Zero(nq, nq);
    const Eigen::MatrixXcd T = model.hopping_matrix();
    split.h0_single_particle.topLeftCorner(M, M) = T;
    split.h0_single_particle.bottomRightCorner(M, M) = T;
    split.hint_terms = kanamori_terms(model.U, model.J, model.n_imp, M);

    PauliHamiltonian H = jordan_wigner(aim_fermion_terms(model), nq);
    return {std::move(H), std::move(split)};
}

PauliHamiltonian quadratic_pauli(const Eigen::MatrixXcd& h) {
    const int nq = int(h.rows());
    std::vector<FermionTerm> terms;
    for (int p = 0; p < nq; ++p) {
        for (int q = 0; q < nq; ++q) {
            if (std::abs(h(p, q)) < 1e-15) continue;
            terms.push_back({h(p, q), {FermionOp{p, true}, FermionOp{q, false}}});
        }
    }
    return jordan_wigner(terms, nq);
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> block_tridiagonalize(
    const Eigen::MatrixXcd& hopping, int n_imp) {
    const int M = int(hopping.rows());
    if (hopping.cols() != M) throw std::invalid_argument("block_tridiagonalize: not square");
    if ((hopping - hopping.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("block_tridiagonalize: input not Hermitian");
    if (n_imp < 1 || n_imp > M) throw std::invalid_argument("block_tridiagonalize: bad n_imp");

    // block Lanczos started from the impurity block basis
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(M, M);
    Q.topLeftCorner(n_imp, n_imp).setIdentity();
    int built = n_imp;

    auto qr_positive = [](const Eigen::MatrixXcd& W, double tol) {
        // thin QR with positive real diagonal of R; rank-deficient columns dropped
        Eigen::MatrixXcd A = W;
        const int rows = int(A.rows()), cols = int(A.cols());
        Eigen::MatrixXcd Qo(rows, cols);
        int rank = 0;
        for (int c = 0; c < cols; ++c) {
            Eigen::VectorXcd v = A.col(c);
            for (int rep = 0; rep < 2; ++rep) {
                for (int k = 0; k < rank; ++k) v -= Qo.col(k).dot(v) * Qo.col(k);
            }
            const double nrm = v.norm();
            if (nrm > tol) {
                Qo.col(rank) = v / nrm;
                ++rank;
            }
        }
        return Eigen::MatrixXcd(Qo.leftCols(rank));
    };

    Eigen::MatrixXcd Qprev;                 // previous block
    Eigen::MatrixXcd Qcur = Q.leftCols(n_imp);
    while (built < M) {
        Eigen::MatrixXcd W = hopping * Qcur;
        W -= Qcur * (Qcur.adjoint() * W);
        if (Qprev.size() > 0) W -= Qprev * (Qprev.adjoint() * W);
        // full re-orthogonalization against everything built so far
        W -= Q.leftCols(built) * (Q.leftCols(built).adjoint() * W);
        Eigen::MatrixXcd Qnext = qr_positive(W, 1e-12);
        if (Qnext.cols() == 0) break;  // invariant subspace exhausted
        const int take = std::min<int>(int(Qnext.cols()), M - built);
        Q.middleCols(built, take) = Qnext.leftCols(take);
        Qprev = Qcur;
        Qcur = Q.middleCols(built, take);
        built += take;
    }
    if (built < M) {
        // complete with the orthogonal complement (deterministic: project identity columns)
        for (int c = 0; c < M && built < M; ++c) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Unit(M, c);
            for (int rep = 0; rep < 2; ++rep)
                v -= Q.leftCols(built) * (Q.leftCols(built).adjoint() * v);
            if (v.norm() > 1e-8) {
                Q.col(built++) = v / v.norm();
            }
        }
    }
    if (built < M) throw std::runtime_error("block_tridiagonalize: basis completion failed");
    Eigen::MatrixXcd Tb = Q.adjoint() * hopping * Q;
    // clean tiny elements outside the tridiagonal band for numerical tidiness
    return {Tb, Q};
}

}  // namespace aimq
