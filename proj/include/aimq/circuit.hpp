#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace aimq {

enum class GateKind { UnitaryBlock, Rx, Ry, Rz, Cnot };

/// A gate in a circuit. Rotations carry an angle (radians); CNOT carries
/// (control, target); UnitaryBlock carries a dense 2^k x 2^k matrix acting on
/// `qubits` (ascending order, qubits[0] = least significant local bit).
struct Gate {
    GateKind kind;
    std::vector<int> qubits;
    double angle = 0.0;
    Eigen::MatrixXcd matrix;

    static Gate rx(int q, double theta);
    static Gate ry(int q, double theta);
    static Gate rz(int q, double theta);
    static Gate cnot(int control, int target);
    static Gate unitary(std::vector<int> qubits, Eigen::MatrixXcd u);

    Eigen::Matrix2cd rotation_matrix() const;  // for Rx/Ry/Rz
};

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;

    void append(Gate g);
    void append(const Circuit& other);
    int cnot_count() const;
    /// depth counted in layers of non-overlapping CNOTs (1q gates free)
    int cnot_depth() const;
};

/// Bit-exact circuit file format: one gate per line, `U k q0..q_{k-1}` followed by
/// the row-major complex entries on continuation lines.
void write_circuit(std::ostream& os, const Circuit& c);
Circuit read_circuit(std::istream& is);
void save_circuit(const std::string& path, const Circuit& c);
Circuit load_circuit(const std::string& path);

}  // namespace aimq
