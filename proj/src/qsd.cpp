#include "aimq/qsd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aimq {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;

const cdouble kI(0, 1);

Matrix2cd pauli_x() { return (Matrix2cd() << 0, 1, 1, 0).finished(); }
Matrix2cd pauli_y() { return (Matrix2cd() << 0, -kI, kI, 0).finished(); }
Matrix2cd pauli_z() { return (Matrix2cd() << 1, 0, 0, -1).finished(); }

// op on qubit 0 (a) and qubit 1 (b): kron(b, a), little-endian
Matrix4cd op2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = b(i, j) * a;
    return m;
}

Matrix4cd xx() { return op2(pauli_x(), pauli_x()); }
Matrix4cd yy() { return op2(pauli_y(), pauli_y()); }
Matrix4cd zz() { return op2(pauli_z(), pauli_z()); }

// magic (Bell) basis; diagonalizes the canonical interactions
Matrix4cd magic_basis() {
    Matrix4cd m;
    m << 1, kI, 0, 0,
         0, 0, kI, 1,
         0, 0, kI, -1,
         1, -kI, 0, 0;
    return m / std::sqrt(2.0);
}

// diagonalize a complex symmetric unitary m = P D P^T with P in SO(4)
Eigen::Matrix4d so4_diagonalizer(const Matrix4cd& m) {
    Eigen::Matrix4d mr = m.real(), mi = m.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(mr);
    Eigen::Matrix4d p = es.eigenvectors();
    Eigen::Vector4d w = es.eigenvalues();
    int i = 0;
    while (i < 4) {
        int j = i;
        while (j < 4 && std::abs(w[j] - w[i]) < 1e-9) ++j;
        if (j - i > 1) {
            Eigen::MatrixXd block = p.middleCols(i, j - i).transpose() * mi * p.middleCols(i, j - i);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2((block + block.transpose()) / 2);
            p.middleCols(i, j - i) = p.middleCols(i, j - i) * es2.eigenvectors();
        }
        i = j;
    }
    if (p.determinant() < 0) p.col(0) = -p.col(0);
    return p;
}

std::pair<Matrix2cd, Matrix2cd> factor_local(const Matrix4cd& k) {
    // k = kron(k1, k0): rows (r1 r0), cols (c1 c0); matricize over (r1c1),(r0c0)
    Matrix4cd re;
    for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
            for (int r0 = 0; r0 < 2; ++r0)
                for (int c0 = 0; c0 < 2; ++c0)
                    re(r1 * 2 + c1, r0 * 2 + c0) = k(r1 * 2 + r0, c1 * 2 + c0);
    Eigen::JacobiSVD<Matrix4cd> svd(re, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()[1] > 1e-8)
        throw std::runtime_error("factor_local: matrix is not a tensor product");
    const double s0 = std::sqrt(svd.singularValues()[0]);
    Matrix2cd k1, k0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            k1(r, c) = svd.matrixU()(r * 2 + c, 0) * s0;
            k0(r, c) = std::conj(svd.matrixV()(r * 2 + c, 0)) * s0;
        }
    return {k0, k1};
}

}  // namespace

Matrix4cd canonical_gate(double a, double b, double c) {
    const Matrix4cd h = a * xx() + b * yy() + c * zz();
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(h);
    Eigen::Vector4cd ph;
    for (int i = 0; i < 4; ++i) ph[i] = std::exp(kI * es.eigenvalues()[i]);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

KakDecomposition kak_decompose(const Matrix4cd& u) {
    const Matrix4cd M = magic_basis();
    Matrix4cd ut = M.adjoint() * u * M;
    const cdouble det = ut.determinant();
    const cdouble delta = std::pow(det, 0.25);
    Matrix4cd v = ut / delta;
    Matrix4cd m = v.transpose() * v;
    Eigen::Matrix4d p = so4_diagonalizer(m);
    Eigen::Vector4cd d = (p.transpose() * m * p).diagonal();
    Eigen::Vector4d theta;
    for (int i = 0; i < 4; ++i) theta[i] = std::arg(d[i]) / 2.0;
    // force sum(theta) = 0 (mod pi ambiguity absorbed by shifting one branch)
    const double s = theta.sum();
    theta[0] -= M_PI * std::round(s / M_PI);
    Eigen::Vector4cd lam;
    for (int i = 0; i < 4; ++i) lam[i] = std::exp(kI * theta[i]);
    Matrix4cd o1c = v * p * lam.conjugate().asDiagonal();
    if (o1c.real().determinant() < 0) {
        // try flipping one column of p (keeps D, flips det of O1)
        p.col(0) = -p.col(0);
        o1c = v * p * lam.conjugate().asDiagonal();
    }
    if (o1c.imag().cwiseAbs().maxCoeff() > 1e-7)
        throw std::runtime_error("kak_decompose: O1 not real");
    const Matrix4cd K1 = M * o1c * M.adjoint();
    const Matrix4cd K2 = M * p.transpose().cast<cdouble>() * M.adjoint();
    // phases (theta order fixed by magic basis columns):
    // theta = (a-b+c, -a+b+c, a+b-c, -a-b-c)
    KakDecomposition out;
    out.a = (theta[0] + theta[2]) / 2;
    out.b = (theta[1] + theta[2]) / 2;
    out.c = (theta[0] + theta[1]) / 2;
    out.phase = delta;
    auto [k1a, k1b] = factor_local(K1);
    auto [k2a, k2b] = factor_local(K2);
    out.k1a = k1a;
    out.k1b = k1b;
    out.k2a = k2a;
    out.k2b = k2b;
    return out;
}

namespace {

// canonical class moves: N(v) = phase * L * N(v') * R with L, R local
struct ClassReduction {
    Vector3d v;
    Matrix4cd left = Matrix4cd::Identity();
    Matrix4cd right = Matrix4cd::Identity();
    cdouble phase = 1.0;
};

Matrix2cd s_gate() { return (Matrix2cd() << 1, 0, 0, kI).finished(); }
Matrix2cd h_gate() { return (Matrix2cd() << 1, 1, 1, -1).finished() / std::sqrt(2.0); }
Matrix2cd ex_gate() {  // exp(i pi/4 X)
    Matrix2cd m;
    m << 1, kI, kI, 1;
    return m / std::sqrt(2.0);
}

Matrix2cd pauli_of(int axis) {
    switch (axis) {
        case 0: return pauli_x();
        case 1: return pauli_y();
        default: return pauli_z();
    }
}

// reduce angles into (-pi/4, pi/4], sort descending by |.|, push sign to the last slot
ClassReduction canonicalize_class(double a, double b, double c) {
    ClassReduction r;
    r.v = Vector3d(a, b, c);
    // shifts by pi/2: N(a, b, c) = N(a - n pi/2, b, c) * (i XX)^n etc.
    for (int k = 0; k < 3; ++k) {
        int n = int(std::llround(r.v[k] / (M_PI / 2)));
        if (r.v[k] - n * (M_PI / 2) <= -M_PI / 4 + 1e-15) n -= 1;
        r.v[k] -= n * (M_PI / 2);
        n = ((n % 4) + 4) % 4;
        if (n != 0) {
            Matrix4cd pp = op2(pauli_of(k), pauli_of(k));
            Matrix4cd pn = Matrix4cd::Identity();
            for (int t = 0; t < n; ++t) pn = pn * pp;
            r.right = pn * r.right;
            r.phase *= std::pow(kI, n);
        }
    }
    auto swap_axes = [&](int i, int j) {
        Matrix2cd w;
        if ((i == 0 && j == 2) || (i == 2 && j == 0)) w = h_gate();
        else if ((i == 0 && j == 1) || (i == 1 && j == 0)) w = s_gate();
        else w = ex_gate();
        const Matrix4cd W = op2(w, w);
        r.left = r.left * W;
        r.right = W.adjoint() * r.right;
        std::swap(r.v[i], r.v[j]);
    };
    auto flip_pair = [&](int i, int j) {
        const int k = 3 - i - j;
        const Matrix4cd W = op2(pauli_of(k), Matrix2cd::Identity());
        r.left = r.left * W;
        r.right = W * r.right;
        r.v[i] = -r.v[i];
        r.v[j] = -r.v[j];
    };
    // selection sort by |v| descending
    for (int pos = 0; pos < 2; ++pos) {
        int best = pos;
        for (int k = pos + 1; k < 3; ++k)
            if (std::abs(r.v[k]) > std::abs(r.v[best]) + 1e-15) best = k;
        if (best != pos) swap_axes(pos, best);
    }
    int negs = 0;
    for (int k = 0; k < 3; ++k)
        if (r.v[k] < -1e-15) ++negs;
    if (negs == 2) {
        int i = -1, j = -1;
        for (int k = 0; k < 3; ++k)
            if (r.v[k] < -1e-15) (i < 0 ? i : j) = k;
        flip_pair(i, j);
    } else if (negs == 3) {
        flip_pair(0, 1);
    }
    for (int k = 0; k < 2; ++k) {
        if (r.v[k] < -1e-15) flip_pair(k, 2);
    }
    // boundary: (pi/4, b, c<0) ~ (pi/4, b, -c)
    if (std::abs(r.v[0] - M_PI / 4) < 1e-12 && r.v[2] < -1e-15) {
        flip_pair(0, 2);
        const Matrix4cd pp = xx();
        r.right = pp * r.right;
        r.phase *= -kI;  // N(a+pi/2,...) = N(a,...) * (i XX); here a = -pi/4 -> pi/4
        r.v[0] += M_PI / 2;
    }
    return r;
}

// CNOT matrices (little-endian)
Matrix4cd cnot_mat(int control, int target) {
    Matrix4cd m = Matrix4cd::Zero();
    for (int q0 = 0; q0 < 2; ++q0)
        for (int q1 = 0; q1 < 2; ++q1) {
            int i = q0 + 2 * q1;
            int c = (control == 0) ? q0 : q1;
            int t0 = q0, t1 = q1;
            if (c) {
                if (target == 0) t0 ^= 1;
                else t1 ^= 1;
            }
            m(t0 + 2 * t1, i) = 1;
        }
    return m;
}

Matrix2cd rx_mat(double t) {
    Matrix2cd m;
    m << std::cos(t / 2), -kI * std::sin(t / 2), -kI * std::sin(t / 2), std::cos(t / 2);
    return m;
}
Matrix2cd ry_mat(double t) {
    Matrix2cd m;
    m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return m;
}
Matrix2cd rz_mat(double t) {
    Matrix2cd m;
    m << std::exp(-kI * t / 2.0), 0, 0, std::exp(kI * t / 2.0);
    return m;
}

struct TemplateCircuit {
    std::vector<Gate> gates;  // on qubits {0, 1}
    Matrix4cd matrix = Matrix4cd::Identity();

    void add_1q(int q, const Matrix2cd& m) {
        gates.push_back(Gate::unitary({q}, m));
        matrix = (q == 0 ? op2(m, Matrix2cd::Identity()) : op2(Matrix2cd::Identity(), m)) * matrix;
    }
    void add_rot(Gate g) {
        const Matrix2cd m = g.rotation_matrix();
        const int q = g.qubits[0];
        gates.push_back(std::move(g));
        matrix = (q == 0 ? op2(m, Matrix2cd::Identity()) : op2(Matrix2cd::Identity(), m)) * matrix;
    }
    void add_cnot(int c, int t) {
        gates.push_back(Gate::cnot(c, t));
        matrix = cnot_mat(c, t) * matrix;
    }
};

// circuit templates with the canonical class of the (chamber-reduced) target
TemplateCircuit class_template(const Vector3d& v, double tol = 1e-9) {
    TemplateCircuit t;
    const double a = v[0], b = v[1], c = v[2];
    const bool za = std::abs(a) < tol, zb = std::abs(b) < tol, zc = std::abs(c) < tol;
    if (za && zb && zc) return t;
    if (std::abs(a - M_PI / 4) < tol && zb && zc) {
        t.add_cnot(0, 1);
        return t;
    }
    if (zc) {
        // exp(i a XX + i b YY) = (EX (x) EX) C (Rx(-2a) (x) Rz(-2b)) C (EX^dag (x) EX^dag)
        t.add_1q(0, ex_gate().adjoint());
        t.add_1q(1, ex_gate().adjoint());
        t.add_cnot(0, 1);
        t.add_rot(Gate::rx(0, -2 * a));
        t.add_rot(Gate::rz(1, -2 * b));
        t.add_cnot(0, 1);
        t.add_1q(0, ex_gate());
        t.add_1q(1, ex_gate());
        return t;
    }
    // generic three-CNOT staircase
    t.add_cnot(1, 0);
    t.add_rot(Gate::ry(1, M_PI / 2 + 2 * c));
    t.add_cnot(0, 1);
    t.add_rot(Gate::rz(0, M_PI / 2 - 2 * a));
    t.add_rot(Gate::ry(1, M_PI / 2 - 2 * b));
    t.add_cnot(1, 0);
    return t;
}

}  // namespace

void append_1q_zyz(Circuit& c, int qubit, const Matrix2cd& u) {
    // u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta), emitted as Rz(delta), Ry(gamma), Rz(beta)
    Matrix2cd m = u;
    const cdouble det = m.determinant();
    m /= std::sqrt(det);
    const double gamma = 2.0 * std::atan2(std::abs(m(1, 0)), std::abs(m(0, 0)));
    double beta = 0, delta = 0;
    if (std::abs(m(0, 0)) > 1e-12 && std::abs(m(1, 0)) > 1e-12) {
        const double p00 = std::arg(m(0, 0)), p10 = std::arg(m(1, 0));
        beta = p10 - p00;
        delta = -(p10 + p00);
    } else if (std::abs(m(0, 0)) > 1e-12) {
        beta = -2.0 * std::arg(m(0, 0));
        delta = 0;
    } else {
        beta = 2.0 * std::arg(m(1, 0));
        delta = 0;
    }
    auto significant = [](double x) { return std::abs(std::remainder(x, 4 * M_PI)) > 1e-12; };
    if (significant(delta)) c.append(Gate::rz(qubit, delta));
    if (significant(gamma)) c.append(Gate::ry(qubit, gamma));
    if (significant(beta)) c.append(Gate::rz(qubit, beta));
}

Circuit synthesize_2q(const Matrix4cd& u) {
    Circuit out;
    out.n_qubits = 2;
    KakDecomposition kd = kak_decompose(u);
    ClassReduction red = canonicalize_class(kd.a, kd.b, kd.c);
    TemplateCircuit tpl = class_template(red.v);
    // template class must match: align locals through a second KAK of the template
    KakDecomposition kt = kak_decompose(tpl.matrix);
    ClassReduction redt = canonicalize_class(kt.a, kt.b, kt.c);
    if ((red.v - redt.v).cwiseAbs().maxCoeff() > 1e-8)
        throw std::runtime_error("synthesize_2q: template class mismatch");
    // N(red.v) = 1/phT * LT^dag (1/gt K1t^dag T K2t^dag) RT^dag
    // U = g K1 [phU LU N(cl) RU] K2
    //   = (g phU / (gt phT)) (K1 LU LT^dag K1t^dag) T (K2t^dag RT^dag RU K2)
    const Matrix4cd K1 = op2(kd.k1a, kd.k1b);
    const Matrix4cd K2 = op2(kd.k2a, kd.k2b);
    const Matrix4cd K1t = op2(kt.k1a, kt.k1b);
    const Matrix4cd K2t = op2(kt.k2a, kt.k2b);
    const Matrix4cd pre = K1 * red.left * redt.left.adjoint() * K1t.adjoint();
    const Matrix4cd post = K2t.adjoint() * redt.right.adjoint() * red.right * K2;
    auto [pre0, pre1] = factor_local(pre);
    auto [post0, post1] = factor_local(post);
    append_1q_zyz(out, 0, post0);
    append_1q_zyz(out, 1, post1);
    for (const auto& g : tpl.gates) {
        if (g.kind == GateKind::UnitaryBlock) {
            append_1q_zyz(out, g.qubits[0], g.matrix);
        } else {
            out.append(g);
        }
    }
    append_1q_zyz(out, 0, pre0);
    append_1q_zyz(out, 1, pre1);
    return out;
}

namespace {

// uniformly controlled rotation, gray-code construction, 2^m CNOTs
void append_ucr(Circuit& c, const std::vector<double>& angles, const std::vector<int>& controls,
                int target, char axis) {
    const int m = int(controls.size());
    if (m == 0) {
        if (std::abs(angles[0]) > 1e-14)
            c.append(axis == 'y' ? Gate::ry(target, angles[0]) : Gate::rz(target, angles[0]));
        return;
    }
    const size_t K = size_t(1) << m;
    auto gray = [](size_t i) { return i ^ (i >> 1); };
    std::vector<double> phis(K);
    for (size_t i = 0; i < K; ++i) {
        double s = 0;
        for (size_t j = 0; j < K; ++j) {
            const int par = __builtin_popcountll(gray(i) & j) & 1;
            s += (par ? -1.0 : 1.0) * angles[j];
        }
        phis[i] = s / double(K);
    }
    for (size_t i = 0; i < K; ++i) {
        if (std::abs(phis[i]) > 1e-14)
            c.append(axis == 'y' ? Gate::ry(target, phis[i]) : Gate::rz(target, phis[i]));
        const size_t diff = gray((i + 1) % K) ^ gray(i);
        int cbit = 0;
        while (!((diff >> cbit) & 1)) ++cbit;
        c.append(Gate::cnot(controls[cbit], target));
    }
}

// demultiplex block-diagonal [A 0; 0 B]: A = V D W, B = V D^dag W
struct Demux {
    MatrixXcd v, w;
    std::vector<double> rz_angles;
};

Demux demultiplex(const MatrixXcd& a, const MatrixXcd& b) {
    const Eigen::Index n = a.rows();
    const MatrixXcd ab = a * b.adjoint();
    Eigen::ComplexSchur<MatrixXcd> schur(ab);
    const MatrixXcd v = schur.matrixU();
    Eigen::VectorXcd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cdouble lam = schur.matrixT()(i, i);
        d[i] = std::exp(kI * std::arg(lam) / 2.0);
    }
    Demux out;
    out.v = v;
    out.w = d.conjugate().asDiagonal() * v.adjoint() * a;
    out.rz_angles.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.rz_angles[i] = -2.0 * std::arg(d[i]);
    return out;
}

void qsd_recurse(Circuit& c, const MatrixXcd& u, const std::vector<int>& qubits);

void emit_2q(Circuit& c, const Matrix4cd& u, int q0, int q1) {
    Circuit local = synthesize_2q(u);
    for (const auto& g : local.gates) {
        Gate gg = g;
        for (auto& q : gg.qubits) q = (q == 0) ? q0 : q1;
        c.append(std::move(gg));
    }
}

void qsd_recurse(Circuit& c, const MatrixXcd& u, const std::vector<int>& qubits) {
    const int k = int(qubits.size());
    if (k == 1) {
        append_1q_zyz(c, qubits[0], u);
        return;
    }
    if (k == 2) {
        emit_2q(c, u, qubits[0], qubits[1]);
        return;
    }
    const Eigen::Index n = Eigen::Index(1) << (k - 1);
    const int msb = qubits.back();
    std::vector<int> lower(qubits.begin(), qubits.end() - 1);
    const MatrixXcd u00 = u.topLeftCorner(n, n);
    const MatrixXcd u01 = u.topRightCorner(n, n);
    const MatrixXcd u10 = u.bottomLeftCorner(n, n);
    const MatrixXcd u11 = u.bottomRightCorner(n, n);
    // CSD via SVD of the upper-left block
    Eigen::BDCSVD<MatrixXcd> svd(u00, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXcd l0 = svd.matrixU();
    const MatrixXcd r0h = svd.matrixV().adjoint();
    Eigen::VectorXd cd = svd.singularValues();
    MatrixXcd w1 = u10 * r0h.adjoint();
    MatrixXcd l1(n, n);
    Eigen::VectorXd sd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = w1.col(i).norm();
        sd[i] = s;
        if (s > 1e-9) {
            l1.col(i) = w1.col(i) / s;
        } else {
            l1.col(i).setZero();
        }
    }
    // complete near-zero columns to a unitary basis
    {
        Eigen::Index fill = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sd[i] > 1e-9) continue;
            // deterministic completion: orthogonalize identity columns
            while (true) {
                Eigen::VectorXcd cand = Eigen::VectorXcd::Zero(n);
                cand[fill % n] = 1.0;
                ++fill;
                for (int rep = 0; rep < 2; ++rep)
                    for (Eigen::Index j = 0; j < n; ++j)
                        if (j != i && (sd[j] > 1e-9 || j < i)) cand -= l1.col(j).dot(cand) * l1.col(j);
                if (cand.norm() > 1e-6) {
                    l1.col(i) = cand / cand.norm();
                    break;
                }
            }
        }
    }
    // recompute sines consistently and clamp
    for (Eigen::Index i = 0; i < n; ++i) {
        sd[i] = std::real(l1.col(i).dot(w1.col(i)));
        cd[i] = std::min(1.0, std::max(-1.0, cd[i]));
    }
    // right blocks: R1^dag = C L1^dag U11 - S L0^dag U01
    const MatrixXcd r1h = cd.asDiagonal() * (l1.adjoint() * u11) - sd.asDiagonal() * (l0.adjoint() * u01);
    std::vector<double> thetas(n);
    for (Eigen::Index i = 0; i < n; ++i) thetas[i] = 2.0 * std::atan2(sd[i], cd[i]);
    Demux left = demultiplex(l0, l1);
    Demux right = demultiplex(r0h, r1h);
    qsd_recurse(c, right.w, lower);
    append_ucr(c, right.rz_angles, lower, msb, 'z');
    qsd_recurse(c, right.v, lower);
    append_ucr(c, thetas, lower, msb, 'y');
    qsd_recurse(c, left.w, lower);
    append_ucr(c, left.rz_angles, lower, msb, 'z');
    qsd_recurse(c, left.v, lower);
}

}  // namespace

Circuit qsd_decompose(const MatrixXcd& u, int max_qubits) {
    const Eigen::Index dim = u.rows();
    int k = 0;
    while ((Eigen::Index(1) << k) < dim) ++k;
    if ((Eigen::Index(1) << k) != dim || u.cols() != dim)
        throw std::invalid_argument("qsd_decompose: dimension is not a power of two");
    if (k > max_qubits) throw std::invalid_argument("qsd_decompose: too many qubits");
    if ((u * u.adjoint() - MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("qsd_decompose: input is not unitary");
    Circuit c;
    c.n_qubits = std::max(k, 1);
    std::vector<int> qubits(k);
    for (int i = 0; i < k; ++i) qubits[i] = i;
    if (k == 0) return c;
    qsd_recurse(c, u, qubits);
    return c;
}

long cnot_count_optimized_qsd(int n_g) {
    if (n_g < 2) throw std::invalid_argument("cnot_count_optimized_qsd: n_g must be >= 2");
    const double v = 23.0 / 48.0 * std::pow(4.0, n_g) - 1.5 * std::pow(2.0, n_g) + 4.0 / 3.0;
    return std::lround(v);
}

long staircase_depth(int n_layers, int n_g, int n_q) {
    if (n_g < 2 || n_q < n_g || n_layers < 1) throw std::invalid_argument("staircase_depth: bad dims");
    return (long(n_layers - 1) * n_g + (n_q - n_g + 1)) * cnot_count_optimized_qsd(n_g);
}

}  // namespace aimq
