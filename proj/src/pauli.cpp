#include "aimq/pauli.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace aimq {

int PauliString::max_qubit() const {
    int m = -1;
    for (const auto& [q, p] : ops) m = std::max(m, q);
    return m;
}

std::string PauliString::str(int n_qubits) const {
    std::string s(n_qubits, 'I');
    for (const auto& [q, p] : ops) s[q] = p;
    return s;
}

namespace {

// single-qubit product table: a*b = phase * c
struct Prod {
    cdouble phase;
    char letter;  // 'I' means identity
};

Prod mul1(char a, char b) {
    if (a == b) return {1.0, 'I'};
    const cdouble i(0, 1);
    if (a == 'X' && b == 'Y') return {i, 'Z'};
    if (a == 'Y' && b == 'X') return {-i, 'Z'};
    if (a == 'Y' && b == 'Z') return {i, 'X'};
    if (a == 'Z' && b == 'Y') return {-i, 'X'};
    if (a == 'Z' && b == 'X') return {i, 'Y'};
    if (a == 'X' && b == 'Z') return {-i, 'Y'};
    throw std::logic_error("bad pauli letters");
}

}  // namespace

std::pair<cdouble, PauliString> multiply(const PauliString& a, const PauliString& b) {
    PauliString out;
    out.ops.reserve(a.ops.size() + b.ops.size());
    cdouble phase = 1.0;
    size_t i = 0, j = 0;
    while (i < a.ops.size() || j < b.ops.size()) {
        if (j == b.ops.size() || (i < a.ops.size() && a.ops[i].first < b.ops[j].first)) {
            out.ops.push_back(a.ops[i++]);
        } else if (i == a.ops.size() || b.ops[j].first < a.ops[i].first) {
            out.ops.push_back(b.ops[j++]);
        } else {
            auto [ph, c] = mul1(a.ops[i].second, b.ops[j].second);
            phase *= ph;
            if (c != 'I') out.ops.emplace_back(a.ops[i].first, c);
            ++i;
            ++j;
        }
    }
    return {phase, out};
}

void PauliHamiltonian::simplify(double cutoff) {
    std::map<std::vector<std::pair<int, char>>, cdouble> acc;
    for (auto& t : terms) acc[t.string.ops] += t.coeff;
    terms.clear();
    for (auto& [ops, c] : acc) {
        if (std::abs(c) > cutoff) terms.push_back({c, PauliString{ops}});
    }
}

PauliHamiltonian& PauliHamiltonian::operator+=(const PauliHamiltonian& other) {
    if (other.n_qubits > n_qubits) n_qubits = other.n_qubits;
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    return *this;
}

PauliHamiltonian PauliHamiltonian::operator*(const PauliHamiltonian& other) const {
    PauliHamiltonian out;
    out.n_qubits = std::max(n_qubits, other.n_qubits);
    out.terms.reserve(terms.size() * other.terms.size());
    for (const auto& a : terms) {
        for (const auto& b : other.terms) {
            auto [ph, s] = multiply(a.string, b.string);
            out.terms.push_back({a.coeff * b.coeff * ph, s});
        }
    }
    out.simplify();
    return out;
}

bool PauliHamiltonian::is_hermitian(double tol) const {
    PauliHamiltonian copy = *this;
    copy.simplify(0.0);
    for (const auto& t : copy.terms) {
        if (std::abs(t.coeff.imag()) > tol) return false;
    }
    return true;
}

Eigen::MatrixXcd PauliHamiltonian::to_dense() const {
    if (n_qubits > 14) throw std::invalid_argument("to_dense: too many qubits");
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& t : terms) {
        std::uint64_t xmask = 0, zmask = 0;
        cdouble pref = t.coeff;
        for (const auto& [q, p] : t.string.ops) {
            if (p == 'X') {
                xmask |= std::uint64_t(1) << q;
            } else if (p == 'Z') {
                zmask |= std::uint64_t(1) << q;
            } else {  // Y = i * X * Z applied as X then Z... use Y = -i Z X convention below
                xmask |= std::uint64_t(1) << q;
                zmask |= std::uint64_t(1) << q;
                pref *= cdouble(0, 1);
            }
        }
        // P = pref * (X-part) with Z phases: P|n> = pref * (-1)^{popcount(n & zmask)} |n ^ xmask>
        // For Y: Y = i X Z, so acting on |n>: Z first then X; phase i per Y absorbed in pref.
        for (std::int64_t n = 0; n < dim; ++n) {
            const int zpar = __builtin_popcountll(std::uint64_t(n) & zmask) & 1;
            H(n ^ std::int64_t(xmask), n) += (zpar ? -pref : pref);
        }
    }
    return H;
}

Eigen::VectorXcd PauliHamiltonian::apply(const Eigen::VectorXcd& v) const {
    if (n_qubits > 62) throw std::invalid_argument("apply: too many qubits");
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    if (v.size() != dim) throw std::invalid_argument("apply: size mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (const auto& t : terms) {
        std::uint64_t xmask = 0, zmask = 0;
        cdouble pref = t.coeff;
        for (const auto& [q, p] : t.string.ops) {
            if (p == 'X') {
                xmask |= std::uint64_t(1) << q;
            } else if (p == 'Z') {
                zmask |= std::uint64_t(1) << q;
            } else {
                xmask |= std::uint64_t(1) << q;
                zmask |= std::uint64_t(1) << q;
                pref *= cdouble(0, 1);
            }
        }
        for (std::int64_t n = 0; n < dim; ++n) {
            const int zpar = __builtin_popcountll(std::uint64_t(n) & zmask) & 1;
            out[n ^ std::int64_t(xmask)] += (zpar ? -pref : pref) * v[n];
        }
    }
    return out;
}

FermionTerm FermionTerm::dagger() const {
    FermionTerm out;
    out.coeff = std::conj(coeff);
    out.ops.assign(ops.rbegin(), ops.rend());
    for (auto& op : out.ops) op.dagger = !op.dagger;
    return out;
}

PauliHamiltonian jordan_wigner(const FermionTerm& term, int n_qubits) {
    for (const auto& op : term.ops) {
        if (op.orbital < 0 || op.orbital >= n_qubits)
            throw std::out_of_range("jordan_wigner: orbital index out of range");
    }
    // start with the scalar term
    PauliHamiltonian acc;
    acc.n_qubits = n_qubits;
    acc.terms.push_back({term.coeff, PauliString{}});
    for (const auto& op : term.ops) {
        // image of c^dag_p (resp. c_p): (X_p -+ iY_p)/2 * prod_{q<p} Z_q
        PauliHamiltonian img;
        img.n_qubits = n_qubits;
        PauliString sx, sy;
        for (int q = 0; q < op.orbital; ++q) {
            sx.ops.emplace_back(q, 'Z');
            sy.ops.emplace_back(q, 'Z');
        }
        sx.ops.emplace_back(op.orbital, 'X');
        sy.ops.emplace_back(op.orbital, 'Y');
        const cdouble iy = op.dagger ? cdouble(0, -0.5) : cdouble(0, 0.5);
        img.terms.push_back({0.5, sx});
        img.terms.push_back({iy, sy});
        acc = acc * img;
    }
    acc.simplify();
    return acc;
}

PauliHamiltonian jordan_wigner(const std::vector<FermionTerm>& terms, int n_qubits) {
    PauliHamiltonian out;
    out.n_qubits = n_qubits;
    for (const auto& t : terms) out += jordan_wigner(t, n_qubits);
    out.simplify();
    return out;
}

PauliHamiltonian number_operator(int n_qubits) {
    PauliHamiltonian out;
    out.n_qubits = n_qubits;
    out.terms.push_back({0.5 * double(n_qubits), PauliString{}});
    for (int q = 0; q < n_qubits; ++q) {
        PauliString z;
        z.ops.emplace_back(q, 'Z');
        out.terms.push_back({-0.5, z});
    }
    return out;
}

}  // namespace aimq
