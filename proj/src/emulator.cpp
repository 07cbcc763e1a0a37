#include "aimq/emulator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>

namespace aimq {

Statevector::Statevector(int nq) : n_qubits(nq) {
    if (nq < 1 || nq > kDenseQubitLimit) throw std::invalid_argument("Statevector: bad qubit count");
    amplitudes = Eigen::VectorXcd::Zero(std::int64_t(1) << nq);
}

Statevector Statevector::zero_state(int nq) {
    Statevector s(nq);
    s.amplitudes[0] = 1.0;
    return s;
}

cdouble overlap(const Statevector& a, const Statevector& b) {
    if (a.n_qubits != b.n_qubits) throw std::invalid_argument("overlap: size mismatch");
    return a.amplitudes.dot(b.amplitudes);  // Eigen dot conjugates the left argument
}

namespace {

void apply_1q(const Eigen::Matrix2cd& m, int q, Eigen::VectorXcd& v) {
    const std::int64_t dim = v.size();
    const std::int64_t bit = std::int64_t(1) << q;
    for (std::int64_t base = 0; base < dim; ++base) {
        if (base & bit) continue;
        const cdouble a0 = v[base], a1 = v[base | bit];
        v[base] = m(0, 0) * a0 + m(0, 1) * a1;
        v[base | bit] = m(1, 0) * a0 + m(1, 1) * a1;
    }
}

void apply_cnot(int control, int target, Eigen::VectorXcd& v) {
    const std::int64_t dim = v.size();
    const std::int64_t cbit = std::int64_t(1) << control;
    const std::int64_t tbit = std::int64_t(1) << target;
    for (std::int64_t n = 0; n < dim; ++n) {
        if ((n & cbit) && !(n & tbit)) std::swap(v[n], v[n | tbit]);
    }
}

void apply_block(const Eigen::MatrixXcd& m, const std::vector<int>& qs, Eigen::VectorXcd& v) {
    const int k = int(qs.size());
    const std::int64_t sub = std::int64_t(1) << k;
    std::vector<std::int64_t> bits(k);
    for (int i = 0; i < k; ++i) bits[i] = std::int64_t(1) << qs[i];
    std::int64_t mask = 0;
    for (auto b : bits) mask |= b;
    const std::int64_t dim = v.size();
    Eigen::VectorXcd local(sub);
    for (std::int64_t base = 0; base < dim; ++base) {
        if (base & mask) continue;  // enumerate states with all gate qubits = 0
        for (std::int64_t l = 0; l < sub; ++l) {
            std::int64_t idx = base;
            for (int i = 0; i < k; ++i) {
                if (l & (std::int64_t(1) << i)) idx |= bits[i];
            }
            local[l] = v[idx];
        }
        Eigen::VectorXcd out = m * local;
        for (std::int64_t l = 0; l < sub; ++l) {
            std::int64_t idx = base;
            for (int i = 0; i < k; ++i) {
                if (l & (std::int64_t(1) << i)) idx |= bits[i];
            }
            v[idx] = out[l];
        }
    }
}

}  // namespace

void apply_gate_inplace(const Gate& g, Statevector& s) {
    for (int q : g.qubits) {
        if (q < 0 || q >= s.n_qubits) throw std::out_of_range("apply_gate: qubit out of range");
    }
    switch (g.kind) {
        case GateKind::Rx:
        case GateKind::Ry:
        case GateKind::Rz:
            apply_1q(g.rotation_matrix(), g.qubits[0], s.amplitudes);
            break;
        case GateKind::Cnot:
            apply_cnot(g.qubits[0], g.qubits[1], s.amplitudes);
            break;
        case GateKind::UnitaryBlock:
            if (g.qubits.size() == 1) {
                apply_1q(g.matrix, g.qubits[0], s.amplitudes);
            } else {
                apply_block(g.matrix, g.qubits, s.amplitudes);
            }
            break;
    }
}

Statevector apply_circuit(const Circuit& c, const Statevector& s) {
    if (c.n_qubits != s.n_qubits) throw std::invalid_argument("apply_circuit: qubit count mismatch");
    Statevector out = s;
    for (const auto& g : c.gates) apply_gate_inplace(g, out);
    return out;
}

Statevector apply_ladder(int alpha, bool dagger, const Statevector& s) {
    if (alpha < 0 || alpha >= s.n_qubits) throw std::out_of_range("apply_ladder: index out of range");
    Statevector out(s.n_qubits);
    const std::int64_t dim = s.dim();
    const std::int64_t bit = std::int64_t(1) << alpha;
    const std::uint64_t parity_mask = bit - 1;  // qubits below alpha carry the Z string
    for (std::int64_t n = 0; n < dim; ++n) {
        const bool occ = n & bit;
        if (dagger == occ) continue;  // annihilated
        const std::int64_t m = n ^ bit;
        const int par = __builtin_popcountll(std::uint64_t(n) & parity_mask) & 1;
        out.amplitudes[m] = par ? -s.amplitudes[n] : s.amplitudes[n];
    }
    return out;
}

double expectation(const PauliHamiltonian& h, const Statevector& s) {
    if (h.n_qubits != s.n_qubits) throw std::invalid_argument("expectation: size mismatch");
    const cdouble val = overlap(s, apply_pauli_sum(h, s));
    if (h.is_hermitian() && std::abs(val.imag()) > 1e-8)
        throw std::runtime_error("expectation: imaginary residue too large");
    return val.real();
}

Statevector apply_pauli_sum(const PauliHamiltonian& h, const Statevector& s) {
    if (h.n_qubits != s.n_qubits) throw std::invalid_argument("apply_pauli_sum: size mismatch");
    Statevector out(s.n_qubits);
    out.amplitudes = h.apply(s.amplitudes);
    return out;
}

GivensNetwork givens_decompose(const Eigen::MatrixXcd& u) {
    const int M = int(u.rows());
    Eigen::MatrixXcd a = u;
    GivensNetwork net;
    std::vector<GivensLayer> elim;  // rotations G with (prod G) u = diag
    for (int j = 0; j < M; ++j) {
        for (int i = M - 1; i > j; --i) {
            const cdouble x = a(i - 1, j), y = a(i, j);
            if (std::abs(y) < 1e-15) continue;
            const double r = std::sqrt(std::norm(x) + std::norm(y));
            Eigen::Matrix2cd g;
            g << std::conj(x) / r, std::conj(y) / r, -y / r, x / r;
            a.middleRows(i - 1, 2) = g * a.middleRows(i - 1, 2);
            elim.push_back({i - 1, g});
        }
    }
    net.phases = a.diagonal();
    // (G_K ... G_1) u = D, so u = G_1^dag ... G_K^dag D: on a state, apply phases
    // first, then the adjoints in reverse elimination order
    net.layers.reserve(elim.size());
    for (auto it = elim.rbegin(); it != elim.rend(); ++it) {
        net.layers.push_back({it->mode, it->rot.adjoint()});
    }
    return net;
}

namespace {

Eigen::Matrix4cd matchgate(const Eigen::Matrix2cd& g) {
    // little-endian local basis (n_p, n_{p+1}): indices 0=00, 1=10, 2=01, 3=11
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = g(0, 0);
    m(2, 1) = g(1, 0);
    m(1, 2) = g(0, 1);
    m(2, 2) = g(1, 1);
    m(3, 3) = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    return m;
}

}  // namespace

TrotterPropagator::TrotterPropagator(const HamiltonianSplit& split, double dt, int n_trotter)
    : dt_(dt), n_trotter_(n_trotter), n_sites_(split.n_sites) {
    if (dt <= 0) throw std::invalid_argument("TrotterPropagator: dt must be > 0");
    if (n_trotter < 1) throw std::invalid_argument("TrotterPropagator: n_T must be >= 1");
    const double tau = dt / n_trotter;
    const int M = split.n_sites;

    // quadratic part: identical spin blocks; decompose exp(-i h tau)
    const Eigen::MatrixXcd h = split.h0_single_particle.topLeftCorner(M, M);
    if ((split.h0_single_particle.topLeftCorner(M, M) -
         split.h0_single_particle.bottomRightCorner(M, M))
            .cwiseAbs()
            .maxCoeff() > 1e-12)
        throw std::invalid_argument("TrotterPropagator: spin blocks of h0 differ");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd w = es.eigenvalues();
    const Eigen::MatrixXcd Q = es.eigenvectors();
    auto expm = [&](double t) {
        Eigen::VectorXcd ph(w.size());
        for (int i = 0; i < w.size(); ++i) ph[i] = std::exp(cdouble(0, -w[i] * t));
        return Eigen::MatrixXcd(Q * ph.asDiagonal() * Q.adjoint());
    };
    quad_ = givens_decompose(expm(tau));
    quad_inv_ = givens_decompose(expm(-tau));

    // interaction part: dense gate on the impurity qubits (both spin blocks)
    const int ni = split.n_imp;
    std::vector<int> imp_qubits;
    for (int i = 0; i < ni; ++i) imp_qubits.push_back(i);
    for (int i = 0; i < ni; ++i) imp_qubits.push_back(M + i);
    if (!split.hint_terms.empty()) {
        PauliHamiltonian hint = jordan_wigner(split.hint_terms, 2 * M);
        // remap support onto the local impurity register
        PauliHamiltonian local;
        local.n_qubits = 2 * ni;
        for (const auto& t : hint.terms) {
            PauliString s;
            for (const auto& [q, p] : t.string.ops) {
                int lq;
                if (q < ni) {
                    lq = q;
                } else if (q >= M && q < M + ni) {
                    lq = ni + (q - M);
                } else {
                    throw std::logic_error("Hint term leaks outside impurity qubits");
                }
                s.ops.emplace_back(lq, p);
            }
            std::sort(s.ops.begin(), s.ops.end());
            local.terms.push_back({t.coeff, s});
        }
        Eigen::MatrixXcd Hd = local.to_dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ei(Hd);
        auto uexp = [&](double t) {
            Eigen::VectorXcd ph(ei.eigenvalues().size());
            for (int i = 0; i < ph.size(); ++i)
                ph[i] = std::exp(cdouble(0, -ei.eigenvalues()[i] * t));
            return Eigen::MatrixXcd(ei.eigenvectors() * ph.asDiagonal() * ei.eigenvectors().adjoint());
        };
        hint_half_ = Gate::unitary(imp_qubits, uexp(tau / 2));
        hint_half_inv_ = Gate::unitary(imp_qubits, uexp(-tau / 2));
        has_hint_ = true;
    }
}

void TrotterPropagator::apply_quadratic(const GivensNetwork& net, Statevector& s) const {
    const int M = n_sites_;
    for (int spin = 0; spin < 2; ++spin) {
        const int off = spin * M;
        for (int m = 0; m < net.phases.size(); ++m) {
            // diagonal phase on mode m: phase applied when qubit occupied
            Eigen::Matrix2cd d = Eigen::Matrix2cd::Identity();
            d(1, 1) = net.phases[m];
            apply_1q(d, off + m, s.amplitudes);
        }
        for (const auto& layer : net.layers) {
            Gate g = Gate::unitary({off + layer.mode, off + layer.mode + 1}, matchgate(layer.rot));
            apply_gate_inplace(g, s);
        }
    }
}

void TrotterPropagator::apply_inplace(Statevector& s, bool inverse) const {
    for (int step = 0; step < n_trotter_; ++step) {
        if (has_hint_) apply_gate_inplace(inverse ? hint_half_inv_ : hint_half_, s);
        apply_quadratic(inverse ? quad_inv_ : quad_, s);
        if (has_hint_) apply_gate_inplace(inverse ? hint_half_inv_ : hint_half_, s);
    }
}

Statevector TrotterPropagator::apply(const Statevector& s, bool inverse) const {
    Statevector out = s;
    apply_inplace(out, inverse);
    return out;
}

}  // namespace aimq
