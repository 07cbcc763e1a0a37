#include "aimq/mps.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>

namespace aimq {

namespace {

// tensor T[s](l, r) reshapes
Eigen::MatrixXcd left_matrix(const std::array<Eigen::MatrixXcd, 2>& t) {
    // rows (l * 2 + s), cols r
    const auto rows = t[0].rows(), cols = t[0].cols();
    Eigen::MatrixXcd m(rows * 2, cols);
    for (Eigen::Index l = 0; l < rows; ++l) {
        m.row(2 * l) = t[0].row(l);
        m.row(2 * l + 1) = t[1].row(l);
    }
    return m;
}

std::array<Eigen::MatrixXcd, 2> from_left_matrix(const Eigen::MatrixXcd& m) {
    const auto rows = m.rows() / 2, cols = m.cols();
    std::array<Eigen::MatrixXcd, 2> t{Eigen::MatrixXcd(rows, cols), Eigen::MatrixXcd(rows, cols)};
    for (Eigen::Index l = 0; l < rows; ++l) {
        t[0].row(l) = m.row(2 * l);
        t[1].row(l) = m.row(2 * l + 1);
    }
    return t;
}

Eigen::MatrixXcd right_matrix(const std::array<Eigen::MatrixXcd, 2>& t) {
    // rows l, cols (r * 2 + s)
    const auto rows = t[0].rows(), cols = t[0].cols();
    Eigen::MatrixXcd m(rows, cols * 2);
    for (Eigen::Index r = 0; r < cols; ++r) {
        m.col(2 * r) = t[0].col(r);
        m.col(2 * r + 1) = t[1].col(r);
    }
    return m;
}

std::array<Eigen::MatrixXcd, 2> from_right_matrix(const Eigen::MatrixXcd& m) {
    const auto rows = m.rows(), cols = m.cols() / 2;
    std::array<Eigen::MatrixXcd, 2> t{Eigen::MatrixXcd(rows, cols), Eigen::MatrixXcd(rows, cols)};
    for (Eigen::Index r = 0; r < cols; ++r) {
        t[0].col(r) = m.col(2 * r);
        t[1].col(r) = m.col(2 * r + 1);
    }
    return t;
}

// thin QR with positive real diagonal of R (deterministic)
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> thin_qr(const Eigen::MatrixXcd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    const Eigen::Index k = std::min(a.rows(), a.cols());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(a.rows(), k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < k; ++i) {
        const cdouble d = r(i, i);
        if (std::abs(d) > 1e-300) {
            const cdouble ph = d / std::abs(d);
            q.col(i) *= ph;
            r.row(i) *= std::conj(ph);
        }
    }
    return {q, r};
}

struct SvdResult {
    Eigen::MatrixXcd u;
    Eigen::VectorXd s;
    Eigen::MatrixXcd v;  // a = u * s.asDiagonal() * v.adjoint()
};

SvdResult thin_svd(const Eigen::MatrixXcd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

int truncation_rank(const Eigen::VectorXd& s, int chi_max, double cutoff) {
    const double smax = s.size() ? s[0] : 0.0;
    int k = 0;
    while (k < s.size() && k < chi_max && s[k] > cutoff * smax && s[k] > 1e-300) ++k;
    return std::max(k, 1);
}

}  // namespace

std::vector<int> Mps::bond_dims() const {
    std::vector<int> out;
    for (int i = 0; i + 1 < n_sites(); ++i) out.push_back(int(tensors[i][0].cols()));
    return out;
}

int Mps::max_bond_dim() const {
    int m = 1;
    for (int d : bond_dims()) m = std::max(m, d);
    return m;
}

double Mps::norm() const { return std::sqrt(std::abs(overlap(*this, *this))); }

void Mps::normalize() {
    const double n = norm();
    if (n < 1e-300) throw std::runtime_error("Mps::normalize: zero state");
    const int c = (canonical_center >= 0) ? canonical_center : 0;
    for (auto& m : tensors[c]) m /= n;
}

Mps Mps::zero_state(int n) {
    return product_state(std::vector<Eigen::Vector2cd>(n, Eigen::Vector2cd(1.0, 0.0)));
}

Mps Mps::product_state(const std::vector<Eigen::Vector2cd>& amps) {
    Mps m;
    m.tensors.resize(amps.size());
    for (size_t i = 0; i < amps.size(); ++i) {
        m.tensors[i][0] = Eigen::MatrixXcd::Constant(1, 1, amps[i][0]);
        m.tensors[i][1] = Eigen::MatrixXcd::Constant(1, 1, amps[i][1]);
    }
    m.canonical_center = 0;
    return m;
}

Mps Mps::random_state(int n, int chi, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Mps m;
    m.tensors.resize(n);
    int dl = 1;
    for (int i = 0; i < n; ++i) {
        const int maxr = (n - 1 - i) >= 25 ? (1 << 24) : (1 << (n - 1 - i));
        const int dr = std::min({chi, 2 * dl, maxr});
        for (int s = 0; s < 2; ++s) {
            m.tensors[i][s].resize(dl, dr);
            for (int a = 0; a < dl; ++a)
                for (int b = 0; b < dr; ++b) m.tensors[i][s](a, b) = cdouble(nd(rng), nd(rng));
        }
        dl = dr;
    }
    Mps out = canonicalize(m, 0);
    out.normalize();
    return out;
}

cdouble overlap(const Mps& bra, const Mps& ket) {
    if (bra.n_sites() != ket.n_sites()) throw std::invalid_argument("overlap: size mismatch");
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < bra.n_sites(); ++i) {
        Eigen::MatrixXcd next =
            Eigen::MatrixXcd::Zero(bra.tensors[i][0].cols(), ket.tensors[i][0].cols());
        for (int s = 0; s < 2; ++s) next += bra.tensors[i][s].adjoint() * e * ket.tensors[i][s];
        e = std::move(next);
    }
    return e(0, 0);
}

double fidelity(const Mps& a, const Mps& b) { return std::norm(overlap(a, b)); }

Mps canonicalize(const Mps& state, int center) {
    const int n = state.n_sites();
    if (center < 0 || center >= n) throw std::invalid_argument("canonicalize: bad center");
    Mps m = state;
    for (int i = 0; i < center; ++i) {
        auto [q, r] = thin_qr(left_matrix(m.tensors[i]));
        m.tensors[i] = from_left_matrix(q);
        for (int s = 0; s < 2; ++s) m.tensors[i + 1][s] = r * m.tensors[i + 1][s];
    }
    for (int i = n - 1; i > center; --i) {
        // right-normalize: C(l, r*2+s) = L * Q with Q rows orthonormal
        auto [q, r] = thin_qr(right_matrix(m.tensors[i]).adjoint());
        m.tensors[i] = from_right_matrix(q.adjoint());
        for (int s = 0; s < 2; ++s) m.tensors[i - 1][s] = m.tensors[i - 1][s] * r.adjoint();
    }
    m.canonical_center = center;
    return m;
}

Eigen::VectorXcd to_statevector(const Mps& state, int dense_limit) {
    const int n = state.n_sites();
    if (n > dense_limit) throw std::invalid_argument("to_statevector: above dense limit");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Ones(1, 1);
    for (int k = 0; k < n; ++k) {
        const Eigen::Index rows = a.rows();
        Eigen::MatrixXcd next(rows * 2, state.tensors[k][0].cols());
        next.topRows(rows) = a * state.tensors[k][0];
        next.bottomRows(rows) = a * state.tensors[k][1];
        a = std::move(next);
    }
    return a.col(0);
}

Mps from_statevector(const Eigen::VectorXcd& psi, double cutoff, int chi_max) {
    const auto dim = psi.size();
    int n = 0;
    while ((Eigen::Index(1) << n) < dim) ++n;
    if ((Eigen::Index(1) << n) != dim) throw std::invalid_argument("from_statevector: length not 2^n");
    Mps m;
    m.tensors.resize(n);
    Eigen::MatrixXcd carry = psi.transpose();  // (chi=1) x 2^n, cols index bits k..n-1
    for (int k = 0; k < n; ++k) {
        const Eigen::Index chi = carry.rows();
        const Eigen::Index rest = carry.cols() / 2;
        Eigen::MatrixXcd c2(chi * 2, rest);
        for (Eigen::Index l = 0; l < chi; ++l) {
            for (Eigen::Index r = 0; r < rest; ++r) {
                c2(2 * l, r) = carry(l, 2 * r);  // s_k is the low bit of the rest index
                c2(2 * l + 1, r) = carry(l, 2 * r + 1);
            }
        }
        if (k == n - 1) {
            m.tensors[k] = from_left_matrix(c2);
            break;
        }
        auto svd = thin_svd(c2);
        const int keep = truncation_rank(svd.s, chi_max, cutoff);
        m.tensors[k] = from_left_matrix(svd.u.leftCols(keep));
        carry = svd.s.head(keep).asDiagonal() * svd.v.leftCols(keep).adjoint();
    }
    m.canonical_center = n - 1;
    return m;
}

std::vector<Eigen::MatrixXcd> overlap_left_envs(const Mps& bra, const Mps& ket) {
    const int n = bra.n_sites();
    std::vector<Eigen::MatrixXcd> envs(n + 1);
    envs[0] = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXcd next =
            Eigen::MatrixXcd::Zero(bra.tensors[i][0].cols(), ket.tensors[i][0].cols());
        for (int s = 0; s < 2; ++s) next += bra.tensors[i][s].adjoint() * envs[i] * ket.tensors[i][s];
        envs[i + 1] = std::move(next);
    }
    return envs;
}

std::vector<Eigen::MatrixXcd> overlap_right_envs(const Mps& bra, const Mps& ket) {
    const int n = bra.n_sites();
    std::vector<Eigen::MatrixXcd> envs(n + 1);
    envs[n] = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = n - 1; i >= 0; --i) {
        Eigen::MatrixXcd next =
            Eigen::MatrixXcd::Zero(bra.tensors[i][0].rows(), ket.tensors[i][0].rows());
        for (int s = 0; s < 2; ++s)
            next += bra.tensors[i][s].conjugate() * envs[i + 1] * ket.tensors[i][s].transpose();
        envs[i] = std::move(next);
    }
    return envs;
}

std::pair<Mps, double> truncate(const Mps& state, int chi_max, int fidelity_sweeps) {
    if (chi_max < 1) throw std::invalid_argument("truncate: chi_max must be >= 1");
    const int n = state.n_sites();
    Mps t = canonicalize(state, n - 1);
    for (int i = n - 1; i > 0; --i) {
        // C(l, (r,s)) = U S V^dag; right-iso factor is V^dag, U S moves left
        auto svd = thin_svd(right_matrix(t.tensors[i]));
        const int keep = truncation_rank(svd.s, chi_max, 1e-14);
        t.tensors[i] = from_right_matrix(Eigen::MatrixXcd(svd.v.leftCols(keep).adjoint()));
        const Eigen::MatrixXcd us = svd.u.leftCols(keep) * svd.s.head(keep).asDiagonal();
        for (int s = 0; s < 2; ++s) t.tensors[i - 1][s] = t.tensors[i - 1][s] * us;
    }
    t.canonical_center = 0;
    if (t.norm() > 1e-300) t.normalize();

    for (int sweep = 0; sweep < fidelity_sweeps && n > 1; ++sweep) {
        t = canonicalize(t, 0);
        auto renv = overlap_right_envs(state, t);  // valid for sites > current as we move right
        Eigen::MatrixXcd lenv = Eigen::MatrixXcd::Ones(1, 1);
        for (int i = 0; i < n; ++i) {
            // hole environment G[s](lt, rt) = sum conj(o[s](lo, ro)) L(lo, lt) R(ro, rt)
            std::array<Eigen::MatrixXcd, 2> g;
            double gn2 = 0;
            for (int s = 0; s < 2; ++s) {
                g[s] = lenv.transpose() * state.tensors[i][s].conjugate() * renv[i + 1];
                gn2 += g[s].squaredNorm();
            }
            const double gn = std::sqrt(gn2);
            if (gn > 1e-300) {
                for (int s = 0; s < 2; ++s) t.tensors[i][s] = g[s].conjugate() / gn;
            }
            if (i + 1 < n) {
                auto [q, r] = thin_qr(left_matrix(t.tensors[i]));
                t.tensors[i] = from_left_matrix(q);
                for (int s = 0; s < 2; ++s) t.tensors[i + 1][s] = r * t.tensors[i + 1][s];
                Eigen::MatrixXcd next =
                    Eigen::MatrixXcd::Zero(state.tensors[i][0].cols(), t.tensors[i][0].cols());
                for (int s = 0; s < 2; ++s)
                    next += state.tensors[i][s].adjoint() * lenv * t.tensors[i][s];
                lenv = std::move(next);
            }
        }
        t.canonical_center = n - 1;
        t.normalize();
    }
    if (fidelity_sweeps > 0 && n > 1) {
        t = canonicalize(t, 0);
        t.normalize();
    }
    const double f = std::norm(overlap(t, state));
    return {t, f};
}

// ---------------------------------------------------------------------------
// MPO
// ---------------------------------------------------------------------------

std::vector<int> Mpo::bond_dims() const {
    std::vector<int> out;
    for (const auto& s : sites) out.push_back(s.dr);
    if (!out.empty()) out.pop_back();
    return out;
}

namespace {

Mpo mpo_compress(const Mpo& in, double cutoff);

}  // namespace

Mpo mpo_from_pauli(const PauliHamiltonian& h, double compress_cutoff) {
    const int n = h.n_qubits;
    if (n < 1) throw std::invalid_argument("mpo_from_pauli: empty system");
    // term windows
    struct Win {
        int lo, hi;
        cdouble coeff;
        std::map<int, char> letters;
    };
    std::vector<Win> wins;
    cdouble const_term = 0.0;
    for (const auto& t : h.terms) {
        if (t.string.ops.empty()) {
            const_term += t.coeff;
            continue;
        }
        Win w;
        w.lo = t.string.ops.front().first;
        w.hi = t.string.ops.back().first;
        w.coeff = t.coeff;
        for (const auto& [q, p] : t.string.ops) w.letters[q] = p;
        wins.push_back(std::move(w));
    }
    // channel layout per interior bond b (between sites b-1 and b), b = 1..n-1:
    // 0 = pending, 1..m = active terms, m+1 = done
    std::vector<std::map<int, int>> active(n);  // bond b -> term index -> slot
    std::vector<int> width(n + 1, 1);
    for (int b = 1; b < n; ++b) {
        int slot = 1;
        for (size_t k = 0; k < wins.size(); ++k) {
            if (wins[k].lo < b && wins[k].hi >= b) active[b][int(k)] = slot++;
        }
        width[b] = slot + 1;  // + pending + done
    }
    width[0] = 1;
    width[n] = 1;

    auto pend = [&](int b) { return (b == 0) ? 0 : 0; };
    auto done = [&](int b) { return (b == n) ? 0 : width[b] - 1; };

    Mpo op;
    op.sites.resize(n);
    const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
    auto letter_op = [&](char p) {
        Eigen::Matrix2cd m;
        const cdouble i(0, 1);
        switch (p) {
            case 'I': m = id2; break;
            case 'X': m << 0, 1, 1, 0; break;
            case 'Y': m << 0, -i, i, 0; break;
            case 'Z': m << 1, 0, 0, -1; break;
            default: throw std::logic_error("bad letter");
        }
        return m;
    };
    for (int i = 0; i < n; ++i) {
        auto& site = op.sites[i];
        site.dl = width[i];
        site.dr = width[i + 1];
        site.ops.assign(size_t(site.dl) * site.dr, Eigen::Matrix2cd::Zero());
        const bool has_pend_l = (i == 0) || true;
        const bool has_done_r = true;
        (void)has_pend_l;
        (void)has_done_r;
        // identity chains: pending -> pending (if pending exists on the right),
        // done -> done (if done exists on the left)
        if (i + 1 < n) site.at(pend(i), pend(i + 1)) += id2 * 0;  // ensure allocation semantics
        if (i + 1 < n) site.at(pend(i), pend(i + 1)) = id2;
        if (i > 0) site.at(done(i), done(i + 1)) = id2;
        // but at the last site, done(n)=0 is also where pending->... terms must end;
        // pending chain must not reach the right boundary unless it closed a term.
        if (i == 0 && n == 1) {
            // single site: only direct terms below
        }
        for (size_t k = 0; k < wins.size(); ++k) {
            const auto& w = wins[k];
            if (i < w.lo || i > w.hi) continue;
            auto it = w.letters.find(i);
            const Eigen::Matrix2cd o = (it == w.letters.end()) ? id2 : letter_op(it->second);
            if (w.lo == w.hi) {
                site.at(pend(i), done(i + 1)) += w.coeff * o;
            } else if (i == w.lo) {
                site.at(pend(i), active[i + 1].at(int(k))) = w.coeff * o;
            } else if (i == w.hi) {
                site.at(active[i].at(int(k)), done(i + 1)) = o;
            } else {
                site.at(active[i].at(int(k)), active[i + 1].at(int(k))) = o;
            }
        }
        if (i == 0 && std::abs(const_term) > 0) {
            site.at(pend(0), done(1)) += const_term * id2;
        }
    }
    return mpo_compress(op, compress_cutoff);
}

namespace {

// MPO as MPS with physical dimension 4: tensor block (dl, 4, dr) flattened to
// rows (l * 4 + p), cols r, with p = srow * 2 + scol
Eigen::MatrixXcd mpo_left_matrix(const Mpo::Site& s) {
    Eigen::MatrixXcd m(s.dl * 4, s.dr);
    for (int a = 0; a < s.dl; ++a)
        for (int b = 0; b < s.dr; ++b)
            for (int p = 0; p < 4; ++p) m(a * 4 + p, b) = s.at(a, b)(p / 2, p % 2);
    return m;
}

Mpo::Site mpo_from_left_matrix(const Eigen::MatrixXcd& m) {
    Mpo::Site s;
    s.dl = int(m.rows() / 4);
    s.dr = int(m.cols());
    s.ops.assign(size_t(s.dl) * s.dr, Eigen::Matrix2cd::Zero());
    for (int a = 0; a < s.dl; ++a)
        for (int b = 0; b < s.dr; ++b)
            for (int p = 0; p < 4; ++p) s.at(a, b)(p / 2, p % 2) = m(a * 4 + p, b);
    return s;
}

Eigen::MatrixXcd mpo_right_matrix(const Mpo::Site& s) {
    Eigen::MatrixXcd m(s.dl, 4 * s.dr);
    for (int a = 0; a < s.dl; ++a)
        for (int b = 0; b < s.dr; ++b)
            for (int p = 0; p < 4; ++p) m(a, b * 4 + p) = s.at(a, b)(p / 2, p % 2);
    return m;
}

Mpo::Site mpo_from_right_matrix(const Eigen::MatrixXcd& m) {
    Mpo::Site s;
    s.dl = int(m.rows());
    s.dr = int(m.cols() / 4);
    s.ops.assign(size_t(s.dl) * s.dr, Eigen::Matrix2cd::Zero());
    for (int a = 0; a < s.dl; ++a)
        for (int b = 0; b < s.dr; ++b)
            for (int p = 0; p < 4; ++p) s.at(a, b)(p / 2, p % 2) = m(a, b * 4 + p);
    return s;
}

Mpo mpo_compress(const Mpo& in, double cutoff) {
    Mpo op = in;
    const int n = op.n_sites();
    // left-to-right QR pass
    for (int i = 0; i + 1 < n; ++i) {
        auto [q, r] = thin_qr(mpo_left_matrix(op.sites[i]));
        op.sites[i] = mpo_from_left_matrix(q);
        Eigen::MatrixXcd nxt = r * mpo_right_matrix(op.sites[i + 1]);
        op.sites[i + 1] = mpo_from_right_matrix(nxt);
    }
    // right-to-left SVD truncation pass
    for (int i = n - 1; i > 0; --i) {
        auto svd = thin_svd(mpo_right_matrix(op.sites[i]));
        const int keep = truncation_rank(svd.s, 1 << 20, cutoff);
        op.sites[i] = mpo_from_right_matrix(Eigen::MatrixXcd(svd.v.leftCols(keep).adjoint()));
        const Eigen::MatrixXcd us = svd.u.leftCols(keep) * svd.s.head(keep).asDiagonal();
        op.sites[i - 1] = mpo_from_left_matrix(mpo_left_matrix(op.sites[i - 1]) * us);
    }
    return op;
}

}  // namespace

Eigen::MatrixXcd mpo_to_dense(const Mpo& op) {
    const int n = op.n_sites();
    if (n > 12) throw std::invalid_argument("mpo_to_dense: too many sites");
    std::vector<Eigen::MatrixXcd> acc(op.sites[0].dl);
    for (auto& a : acc) a = Eigen::MatrixXcd::Zero(1, 1);
    acc[0] = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < n; ++i) {
        const auto& st = op.sites[i];
        std::vector<Eigen::MatrixXcd> nxt(st.dr);
        const Eigen::Index dim = acc[0].rows() * 2;
        for (auto& a : nxt) a = Eigen::MatrixXcd::Zero(dim, dim);
        for (int a = 0; a < st.dl; ++a) {
            if (acc[a].cwiseAbs().maxCoeff() == 0.0) continue;
            for (int b = 0; b < st.dr; ++b) {
                const Eigen::Matrix2cd& o = st.at(a, b);
                if (o.cwiseAbs().maxCoeff() == 0.0) continue;
                // site i occupies the HIGH bit relative to previously built sites
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                        if (o(r, c) != cdouble(0))
                            nxt[b].block(r * acc[a].rows(), c * acc[a].cols(), acc[a].rows(),
                                         acc[a].cols()) += o(r, c) * acc[a];
            }
        }
        acc = std::move(nxt);
    }
    return acc[0];
}

namespace {

// environment stacks for <psi|O|psi>: env[d](b, k)
using MpoEnv = std::vector<Eigen::MatrixXcd>;

MpoEnv mpo_env_boundary_left() { return {Eigen::MatrixXcd::Ones(1, 1)}; }

MpoEnv mpo_env_step_left(const MpoEnv& e, const Mpo::Site& w,
                         const std::array<Eigen::MatrixXcd, 2>& bra,
                         const std::array<Eigen::MatrixXcd, 2>& ket) {
    MpoEnv out(w.dr);
    for (auto& m : out) m = Eigen::MatrixXcd::Zero(bra[0].cols(), ket[0].cols());
    for (int a = 0; a < w.dl; ++a) {
        if (e[a].size() == 0) continue;
        for (int b = 0; b < w.dr; ++b) {
            const Eigen::Matrix2cd& o = w.at(a, b);
            if (o.cwiseAbs().maxCoeff() == 0.0) continue;
            for (int sp = 0; sp < 2; ++sp) {
                for (int s = 0; s < 2; ++s) {
                    if (o(sp, s) == cdouble(0)) continue;
                    out[b] += o(sp, s) * (bra[sp].adjoint() * e[a] * ket[s]);
                }
            }
        }
    }
    return out;
}

MpoEnv mpo_env_step_right(const MpoEnv& e, const Mpo::Site& w,
                          const std::array<Eigen::MatrixXcd, 2>& bra,
                          const std::array<Eigen::MatrixXcd, 2>& ket) {
    MpoEnv out(w.dl);
    for (auto& m : out) m = Eigen::MatrixXcd::Zero(bra[0].rows(), ket[0].rows());
    for (int a = 0; a < w.dl; ++a) {
        for (int b = 0; b < w.dr; ++b) {
            const Eigen::Matrix2cd& o = w.at(a, b);
            if (o.cwiseAbs().maxCoeff() == 0.0) continue;
            if (e[b].size() == 0) continue;
            for (int sp = 0; sp < 2; ++sp) {
                for (int s = 0; s < 2; ++s) {
                    if (o(sp, s) == cdouble(0)) continue;
                    out[a] += o(sp, s) * (bra[sp].conjugate() * e[b] * ket[s].transpose());
                }
            }
        }
    }
    return out;
}

}  // namespace

double mps_expectation(const Mpo& op, const Mps& state) {
    if (op.n_sites() != state.n_sites()) throw std::invalid_argument("mps_expectation: size mismatch");
    MpoEnv e = mpo_env_boundary_left();
    for (int i = 0; i < op.n_sites(); ++i)
        e = mpo_env_step_left(e, op.sites[i], state.tensors[i], state.tensors[i]);
    return e[0](0, 0).real();
}

double mps_variance(const Mpo& op, const Mps& state) {
    // <H^2> with a two-layer environment env[d1][d2](b, k)
    const int n = op.n_sites();
    std::vector<std::vector<Eigen::MatrixXcd>> e(1, {Eigen::MatrixXcd::Ones(1, 1)});
    for (int i = 0; i < n; ++i) {
        const auto& w = op.sites[i];
        const auto& t = state.tensors[i];
        std::vector<std::vector<Eigen::MatrixXcd>> nx(
            w.dr, std::vector<Eigen::MatrixXcd>(w.dr, Eigen::MatrixXcd::Zero(t[0].cols(), t[0].cols())));
        for (int a1 = 0; a1 < w.dl; ++a1) {
            for (int a2 = 0; a2 < w.dl; ++a2) {
                if (e[a1][a2].size() == 0 || e[a1][a2].cwiseAbs().maxCoeff() == 0.0) continue;
                for (int b1 = 0; b1 < w.dr; ++b1) {
                    const Eigen::Matrix2cd& o1 = w.at(a1, b1);
                    if (o1.cwiseAbs().maxCoeff() == 0.0) continue;
                    for (int b2 = 0; b2 < w.dr; ++b2) {
                        const Eigen::Matrix2cd& o2 = w.at(a2, b2);
                        if (o2.cwiseAbs().maxCoeff() == 0.0) continue;
                        // bra leg applies o1, then o2 acts between: H^2 = H (top) H (bottom)
                        for (int s2 = 0; s2 < 2; ++s2)      // bra physical
                            for (int s1 = 0; s1 < 2; ++s1)  // middle physical
                                for (int s0 = 0; s0 < 2; ++s0)  // ket physical
                                    if (o1(s2, s1) != cdouble(0) && o2(s1, s0) != cdouble(0))
                                        nx[b1][b2] += o1(s2, s1) * o2(s1, s0) *
                                                      (t[s2].adjoint() * e[a1][a2] * t[s0]);
                    }
                }
            }
        }
        e = std::move(nx);
    }
    const double h2 = e[0][0](0, 0).real();
    const double h1 = mps_expectation(op, state);
    return h2 - h1 * h1;
}

// ---------------------------------------------------------------------------
// two-site DMRG
// ---------------------------------------------------------------------------

namespace {

// local two-site tensor layout: x[((l * 2 + s1) * 2 + s2) * cr + r]
struct TwoSiteOp {
    const MpoEnv* lenv;   // L[a](bl, kl)
    const MpoEnv* renv;   // R[b](br, kr)
    const Mpo::Site* w1;
    const Mpo::Site* w2;
    int cl, cr;

    struct Entry {
        int a, b;
        Eigen::Matrix2cd o;
    };
    std::vector<Entry> nz1, nz2;

    TwoSiteOp(const MpoEnv* le, const MpoEnv* re, const Mpo::Site* s1, const Mpo::Site* s2, int l,
              int r)
        : lenv(le), renv(re), w1(s1), w2(s2), cl(l), cr(r) {
        for (int a = 0; a < w1->dl; ++a)
            for (int m = 0; m < w1->dr; ++m)
                if (w1->at(a, m).cwiseAbs().maxCoeff() != 0.0) nz1.push_back({a, m, w1->at(a, m)});
        for (int m = 0; m < w2->dl; ++m)
            for (int b = 0; b < w2->dr; ++b)
                if (w2->at(m, b).cwiseAbs().maxCoeff() != 0.0) nz2.push_back({m, b, w2->at(m, b)});
    }

    Eigen::Index dim() const { return Eigen::Index(cl) * 4 * cr; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
        const auto& L = *lenv;
        const auto& R = *renv;
        const int dm = w1->dr;
        std::array<std::array<Eigen::MatrixXcd, 2>, 2> M;
        for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2) {
                M[s1][s2].resize(cl, cr);
                for (int l = 0; l < cl; ++l)
                    for (int r = 0; r < cr; ++r)
                        M[s1][s2](l, r) = x[((Eigen::Index(l) * 2 + s1) * 2 + s2) * cr + r];
            }
        // stage 1: A[a][s1][s2] = L[a] * M[s1][s2]
        const int dl = w1->dl;
        std::vector<std::array<std::array<Eigen::MatrixXcd, 2>, 2>> A(dl);
        std::vector<bool> a_used(dl, false);
        for (const auto& e : nz1) a_used[e.a] = true;
        for (int a = 0; a < dl; ++a) {
            if (!a_used[a]) continue;
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) A[a][s1][s2] = L[a] * M[s1][s2];
        }
        // stage 2: B[m][s1p][s2] = sum_{(a,m)} o1(s1p, s1) A[a][s1][s2]
        std::vector<std::array<std::array<Eigen::MatrixXcd, 2>, 2>> B(dm);
        std::vector<bool> b_init(dm, false);
        for (const auto& e : nz1) {
            if (!b_init[e.b]) {
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) B[e.b][i][j] = Eigen::MatrixXcd::Zero(cl, cr);
                b_init[e.b] = true;
            }
            for (int s1p = 0; s1p < 2; ++s1p)
                for (int s1 = 0; s1 < 2; ++s1) {
                    if (e.o(s1p, s1) == cdouble(0)) continue;
                    for (int s2 = 0; s2 < 2; ++s2) B[e.b][s1p][s2] += e.o(s1p, s1) * A[e.a][s1][s2];
                }
        }
        // stage 3: C[b][s1p][s2p] = sum_{(m,b)} o2(s2p, s2) B[m][s1p][s2], then y += C * R[b]^T
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
        const int dr = w2->dr;
        std::vector<std::array<std::array<Eigen::MatrixXcd, 2>, 2>> C(dr);
        std::vector<bool> c_init(dr, false);
        for (const auto& e : nz2) {
            if (!b_init[e.a]) continue;
            if (!c_init[e.b]) {
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) C[e.b][i][j] = Eigen::MatrixXcd::Zero(cl, cr);
                c_init[e.b] = true;
            }
            for (int s2p = 0; s2p < 2; ++s2p)
                for (int s2 = 0; s2 < 2; ++s2) {
                    if (e.o(s2p, s2) == cdouble(0)) continue;
                    for (int s1p = 0; s1p < 2; ++s1p) C[e.b][s2p][s1p] += e.o(s2p, s2) * B[e.a][s1p][s2];
                }
        }
        for (int b = 0; b < dr; ++b) {
            if (!c_init[b]) continue;
            for (int s1p = 0; s1p < 2; ++s1p)
                for (int s2p = 0; s2p < 2; ++s2p) {
                    Eigen::MatrixXcd contrib = C[b][s2p][s1p] * R[b].transpose();
                    for (int l = 0; l < cl; ++l)
                        for (int r = 0; r < cr; ++r)
                            y[((Eigen::Index(l) * 2 + s1p) * 2 + s2p) * cr + r] += contrib(l, r);
                }
        }
        return y;
    }
};

// lowest eigenpair of a Hermitian operator given by `apply`; warm-started Lanczos
// with full reorthogonalization, dense fallback for small problems
template <class Op>
std::pair<double, Eigen::VectorXcd> lowest_eigenpair(const Op& op, const Eigen::VectorXcd& start,
                                                     int subspace, double tol) {
    const Eigen::Index dim = op.dim();
    if (dim <= 96) {
        Eigen::MatrixXcd h(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
            e[j] = 1.0;
            h.col(j) = op.apply(e);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((h + h.adjoint()) / 2.0);
        return {es.eigenvalues()[0], es.eigenvectors().col(0)};
    }
    Eigen::VectorXcd v = start;
    if (v.norm() < 1e-300) v = Eigen::VectorXcd::Ones(dim);
    v /= v.norm();
    double best_val = 0.0;
    Eigen::VectorXcd best_vec = v;
    for (int restart = 0; restart < 4; ++restart) {
        std::vector<Eigen::VectorXcd> basis;
        std::vector<double> alpha, beta;
        Eigen::VectorXcd w = v;
        basis.push_back(w);
        for (int k = 0; k < subspace; ++k) {
            Eigen::VectorXcd hv = op.apply(basis[k]);
            const double a = std::real(basis[k].dot(hv));
            alpha.push_back(a);
            Eigen::VectorXcd r = hv;
            for (size_t j = 0; j < basis.size(); ++j) r -= basis[j].dot(r) * basis[j];
            for (size_t j = 0; j < basis.size(); ++j) r -= basis[j].dot(r) * basis[j];
            const double b = r.norm();
            if (b < 1e-14 || k == subspace - 1) break;
            beta.push_back(b);
            basis.push_back(r / b);
        }
        const int m = int(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
        for (int i = 0; i < m; ++i) next += es.eigenvectors()(i, 0) * basis[i];
        next /= next.norm();
        const double val = es.eigenvalues()[0];
        best_val = val;
        best_vec = next;
        // residual check
        Eigen::VectorXcd res = op.apply(next) - val * next;
        if (res.norm() < tol * std::max(1.0, std::abs(val))) break;
        v = next;
    }
    return {best_val, best_vec};
}

}  // namespace

std::pair<Mps, DmrgReport> dmrg_ground_state(const Mpo& ham, const DmrgOptions& opts) {
    const int n = ham.n_sites();
    if (n < 2) throw std::invalid_argument("dmrg_ground_state: need at least 2 sites");
    if (opts.chi_max < 1) throw std::invalid_argument("dmrg_ground_state: chi_max must be >= 1");
    Mps psi = Mps::random_state(n, std::min(opts.init_chi, opts.chi_max), opts.seed);
    psi = canonicalize(psi, 0);
    psi.normalize();

    DmrgReport report;

    // environment caches: lenvs[i] = contraction of sites < i, renvs[i] = sites > i
    std::vector<MpoEnv> lenvs(n), renvs(n);
    lenvs[0] = mpo_env_boundary_left();
    renvs[n - 1] = {Eigen::MatrixXcd::Ones(1, 1)};
    for (int i = n - 1; i > 0; --i)
        renvs[i - 1] = mpo_env_step_right(renvs[i], ham.sites[i], psi.tensors[i], psi.tensors[i]);

    double last_energy = 0.0;
    bool have_last = false;

    auto local_solve = [&](int i, bool moving_right) {
        const int cl = int(psi.tensors[i][0].rows());
        const int cr = int(psi.tensors[i + 1][0].cols());
        TwoSiteOp op(&lenvs[i], &renvs[i + 1], &ham.sites[i], &ham.sites[i + 1], cl, cr);
        // initial guess: current merged tensor
        Eigen::VectorXcd x0(op.dim());
        for (int l = 0; l < cl; ++l)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2)
                    for (int r = 0; r < cr; ++r) {
                        cdouble val = 0;
                        val = (psi.tensors[i][s1].row(l) * psi.tensors[i + 1][s2].col(r))(0, 0);
                        x0[((Eigen::Index(l) * 2 + s1) * 2 + s2) * cr + r] = val;
                    }
        auto [e, vec] = lowest_eigenpair(op, x0, 25, 1e-12);
        // split via SVD: rows (l, s1), cols (s2, r)
        Eigen::MatrixXcd theta(cl * 2, 2 * cr);
        for (int l = 0; l < cl; ++l)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2)
                    for (int r = 0; r < cr; ++r)
                        theta(l * 2 + s1, s2 * cr + r) =
                            vec[((Eigen::Index(l) * 2 + s1) * 2 + s2) * cr + r];
        auto svd = thin_svd(theta);
        const int keep = truncation_rank(svd.s, opts.chi_max, opts.svd_cutoff);
        report.max_bond_dim = std::max(report.max_bond_dim, keep);
        Eigen::MatrixXcd u = svd.u.leftCols(keep);
        Eigen::VectorXd sv = svd.s.head(keep);
        Eigen::MatrixXcd vh = svd.v.leftCols(keep).adjoint();
        const double wnorm = sv.norm();
        if (wnorm > 1e-300) sv /= wnorm;
        if (moving_right) {
            psi.tensors[i] = from_left_matrix(u);
            Eigen::MatrixXcd sc = sv.asDiagonal() * vh;  // keep x (2*cr), cols (s2*cr + r)
            std::array<Eigen::MatrixXcd, 2> t2;
            for (int s2 = 0; s2 < 2; ++s2) t2[s2] = sc.middleCols(Eigen::Index(s2) * cr, cr);
            psi.tensors[i + 1] = t2;
            psi.canonical_center = i + 1;
            lenvs[i + 1] = mpo_env_step_left(lenvs[i], ham.sites[i], psi.tensors[i], psi.tensors[i]);
        } else {
            std::array<Eigen::MatrixXcd, 2> t2;
            for (int s2 = 0; s2 < 2; ++s2) t2[s2] = vh.middleCols(Eigen::Index(s2) * cr, cr);
            psi.tensors[i + 1] = t2;
            Eigen::MatrixXcd us = u * sv.asDiagonal();
            psi.tensors[i] = from_left_matrix(us);
            psi.canonical_center = i;
            renvs[i] = mpo_env_step_right(renvs[i + 1], ham.sites[i + 1], psi.tensors[i + 1],
                                          psi.tensors[i + 1]);
        }
        return e;
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double e = 0.0;
        for (int i = 0; i + 1 < n; ++i) e = local_solve(i, true);
        report.sweep_energies.push_back(e);
        for (int i = n - 2; i >= 0; --i) e = local_solve(i, false);
        report.sweep_energies.push_back(e);
        if (have_last && std::abs(e - last_energy) < opts.tol) {
            report.converged = true;
            report.energy = e;
            break;
        }
        last_energy = e;
        have_last = true;
        report.energy = e;
    }
    psi = canonicalize(psi, 0);
    psi.normalize();
    report.variance = mps_variance(ham, psi);
    return {psi, report};
}

// ---------------------------------------------------------------------------
// windows
// ---------------------------------------------------------------------------

WindowTensor merge_window(Mps& state, int first, int width) {
    const int n = state.n_sites();
    if (first < 0 || width < 1 || first + width > n) throw std::invalid_argument("merge_window: bad range");
    if (state.canonical_center < first || state.canonical_center >= first + width)
        state = canonicalize(state, first);
    WindowTensor wt;
    wt.width = width;
    wt.chi_l = int(state.tensors[first][0].rows());
    wt.chi_r = int(state.tensors[first + width - 1][0].cols());
    // amp((l * 2^w + s), r), bit k of s belongs to site first + k
    Eigen::MatrixXcd amp(wt.chi_l, 1);
    // build progressively: cur((l * 2^k + s), m) over sites first..first+k-1
    Eigen::MatrixXcd cur = Eigen::MatrixXcd::Identity(wt.chi_l, wt.chi_l);
    long rows = wt.chi_l;
    for (int k = 0; k < width; ++k) {
        const auto& t = state.tensors[first + k];
        const long chi = t[0].cols();
        Eigen::MatrixXcd nxt(rows * 2, chi);
        // new bit s_k goes to position k: new row index = l*2^{k+1} + (s<<k | old_s)
        // with row layout (l * 2^k + s): splitting l-major keeps strides simple
        nxt.setZero();
        for (int s = 0; s < 2; ++s) {
            Eigen::MatrixXcd part = cur * t[s];  // (rows, chi)
            // rows index (l * 2^k + old_s); insert bit s at position k:
            for (long q = 0; q < rows; ++q) {
                const long l = q >> k;
                const long olds = q & ((1L << k) - 1);
                const long nrow = (l << (k + 1)) | (long(s) << k) | olds;
                nxt.row(nrow) = part.row(q);
            }
        }
        cur = std::move(nxt);
        rows *= 2;
    }
    wt.amp = cur;
    return wt;
}

bool replace_window(Mps& state, int first, int width, const WindowTensor& wt, int chi_max,
                    double cutoff) {
    const long sub = 1L << width;
    if (wt.amp.rows() != long(wt.chi_l) * sub || wt.amp.cols() != wt.chi_r)
        throw std::invalid_argument("replace_window: bad tensor shape");
    // split left to right; carry((l*2^{w-k} + s_rest), r)
    std::vector<std::array<Eigen::MatrixXcd, 2>> new_tensors(width);
    Eigen::MatrixXcd carry = wt.amp;
    long lchi = wt.chi_l;
    for (int k = 0; k < width - 1; ++k) {
        const long rem = 1L << (width - k);      // remaining local states including bit k
        const long rows = carry.rows();
        (void)rem;
        // reorganize rows (l * 2^{w-k} + s) with s bit 0 = site (first+k):
        // rows currently (l, s_k, s_rest) with layout l * 2^{w-k} + (s_rest << 1 | s_k)?
        // maintained invariant: row = l * 2^{w-k} + s, bit j of s = site first+k+j
        const long nrest = rows / 2;  // after extracting bit 0
        Eigen::MatrixXcd m(lchi * 2, nrest / lchi * carry.cols());
        // build matrix rows (l*2 + s_k), cols (s_rest, r)
        const long restdim = (1L << (width - k - 1));
        Eigen::MatrixXcd re(lchi * 2, restdim * carry.cols());
        for (long l = 0; l < lchi; ++l)
            for (long s = 0; s < (1L << (width - k)); ++s) {
                const long sk = s & 1;
                const long srest = s >> 1;
                for (long r = 0; r < carry.cols(); ++r)
                    re(l * 2 + sk, srest * carry.cols() + r) = carry(l * (1L << (width - k)) + s, r);
            }
        auto svd = thin_svd(re);
        int keep = truncation_rank(svd.s, 1 << 30, cutoff);
        if (keep > chi_max) return false;
        new_tensors[k] = from_left_matrix(svd.u.leftCols(keep));
        Eigen::MatrixXcd sc = svd.s.head(keep).asDiagonal() * svd.v.leftCols(keep).adjoint();
        // sc(kp, (s_rest * cols + r)) -> carry((kp * 2^{w-k-1}) + s_rest, r)
        Eigen::MatrixXcd nc(keep * restdim, carry.cols());
        for (long kp = 0; kp < keep; ++kp)
            for (long srest = 0; srest < restdim; ++srest)
                for (long r = 0; r < carry.cols(); ++r)
                    nc(kp * restdim + srest, r) = sc(kp, srest * carry.cols() + r);
        carry = std::move(nc);
        lchi = keep;
        (void)m;
    }
    new_tensors[width - 1] = from_left_matrix(carry);
    for (int k = 0; k < width; ++k) state.tensors[first + k] = new_tensors[k];
    state.canonical_center = first + width - 1;
    return true;
}

bool apply_unitary_to_mps(Mps& state, int first, const Eigen::MatrixXcd& u, int chi_max,
                          double cutoff) {
    const int k = [&] {
        int kk = 0;
        while ((Eigen::Index(1) << kk) < u.rows()) ++kk;
        return kk;
    }();
    if ((Eigen::Index(1) << k) != u.rows() || u.rows() != u.cols())
        throw std::invalid_argument("apply_unitary_to_mps: bad matrix size");
    WindowTensor wt = merge_window(state, first, k);
    // amp((l * 2^k + s), r): apply u over the s index per l block
    const long sub = 1L << k;
    for (long l = 0; l < wt.chi_l; ++l)
        wt.amp.middleRows(l * sub, sub) = u * wt.amp.middleRows(l * sub, sub);
    return replace_window(state, first, k, wt, chi_max, cutoff);
}

}  // namespace aimq
