#include "aimq/circuit.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace aimq {

Gate Gate::rx(int q, double theta) { return {GateKind::Rx, {q}, theta, {}}; }
Gate Gate::ry(int q, double theta) { return {GateKind::Ry, {q}, theta, {}}; }
Gate Gate::rz(int q, double theta) { return {GateKind::Rz, {q}, theta, {}}; }
Gate Gate::cnot(int control, int target) {
    if (control == target) throw std::invalid_argument("cnot: control == target");
    return {GateKind::Cnot, {control, target}, 0.0, {}};
}
Gate Gate::unitary(std::vector<int> qubits, Eigen::MatrixXcd u) {
    const auto k = qubits.size();
    const Eigen::Index dim = Eigen::Index(1) << k;
    if (u.rows() != dim || u.cols() != dim) throw std::invalid_argument("unitary: size mismatch");
    for (size_t i = 1; i < qubits.size(); ++i)
        if (qubits[i] <= qubits[i - 1]) throw std::invalid_argument("unitary: qubits must be ascending");
    return {GateKind::UnitaryBlock, std::move(qubits), 0.0, std::move(u)};
}

Eigen::Matrix2cd Gate::rotation_matrix() const {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    Eigen::Matrix2cd m;
    using namespace std::complex_literals;
    switch (kind) {
        case GateKind::Rx: m << c, -1i * s, -1i * s, c; break;
        case GateKind::Ry: m << c, -s, s, c; break;
        case GateKind::Rz: m << std::exp(-0.5i * angle), 0, 0, std::exp(0.5i * angle); break;
        default: throw std::logic_error("rotation_matrix: not a rotation");
    }
    return m;
}

void Circuit::append(Gate g) {
    for (int q : g.qubits) {
        if (q < 0 || q >= n_qubits) throw std::out_of_range("Circuit::append: qubit out of range");
    }
    gates.push_back(std::move(g));
}

void Circuit::append(const Circuit& other) {
    for (const auto& g : other.gates) append(g);
}

int Circuit::cnot_count() const {
    int n = 0;
    for (const auto& g : gates) {
        if (g.kind == GateKind::Cnot) ++n;
    }
    return n;
}

int Circuit::cnot_depth() const {
    // greedy layering over CNOTs only
    std::vector<int> depth_at(n_qubits, 0);
    int depth = 0;
    for (const auto& g : gates) {
        if (g.kind != GateKind::Cnot) continue;
        const int d = std::max(depth_at[g.qubits[0]], depth_at[g.qubits[1]]) + 1;
        depth_at[g.qubits[0]] = depth_at[g.qubits[1]] = d;
        depth = std::max(depth, d);
    }
    return depth;
}

void write_circuit(std::ostream& os, const Circuit& c) {
    os << "qubits " << c.n_qubits << "\n";
    os << std::setprecision(17);
    for (const auto& g : c.gates) {
        switch (g.kind) {
            case GateKind::Rx: os << "RX " << g.qubits[0] << " " << g.angle << "\n"; break;
            case GateKind::Ry: os << "RY " << g.qubits[0] << " " << g.angle << "\n"; break;
            case GateKind::Rz: os << "RZ " << g.qubits[0] << " " << g.angle << "\n"; break;
            case GateKind::Cnot: os << "CNOT " << g.qubits[0] << " " << g.qubits[1] << "\n"; break;
            case GateKind::UnitaryBlock: {
                os << "U " << g.qubits.size();
                for (int q : g.qubits) os << " " << q;
                os << "\n";
                const Eigen::Index dim = g.matrix.rows();
                for (Eigen::Index r = 0; r < dim; ++r) {
                    for (Eigen::Index cc = 0; cc < dim; ++cc) {
                        os << (cc ? " " : "") << g.matrix(r, cc).real() << " " << g.matrix(r, cc).imag();
                    }
                    os << "\n";
                }
                break;
            }
        }
    }
}

Circuit read_circuit(std::istream& is) {
    Circuit c;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("circuit file: empty");
    {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag >> c.n_qubits;
        if (tag != "qubits" || c.n_qubits <= 0) throw std::runtime_error("circuit file: bad header");
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string op;
        ss >> op;
        if (op == "RX" || op == "RY" || op == "RZ") {
            int q;
            double a;
            ss >> q >> a;
            c.append(op == "RX" ? Gate::rx(q, a) : op == "RY" ? Gate::ry(q, a) : Gate::rz(q, a));
        } else if (op == "CNOT") {
            int a, b;
            ss >> a >> b;
            c.append(Gate::cnot(a, b));
        } else if (op == "U") {
            size_t k;
            ss >> k;
            std::vector<int> qs(k);
            for (auto& q : qs) ss >> q;
            const Eigen::Index dim = Eigen::Index(1) << k;
            Eigen::MatrixXcd m(dim, dim);
            for (Eigen::Index r = 0; r < dim; ++r) {
                if (!std::getline(is, line)) throw std::runtime_error("circuit file: truncated U block");
                std::istringstream rs(line);
                for (Eigen::Index cc = 0; cc < dim; ++cc) {
                    double re, im;
                    rs >> re >> im;
                    m(r, cc) = {re, im};
                }
            }
            c.append(Gate::unitary(std::move(qs), std::move(m)));
        } else {
            throw std::runtime_error("circuit file: unknown op '" + op + "'");
        }
    }
    return c;
}

void save_circuit(const std::string& path, const Circuit& c) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_circuit(f, c);
}

Circuit load_circuit(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_circuit(f);
}

}  // namespace aimq
