#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aimq/circuit.hpp"
#include "aimq/model.hpp"
#include "aimq/pauli.hpp"

namespace aimq {

/// Dense statevector, little-endian: amplitude index = sum_q bit_q * 2^q.
struct Statevector {
    int n_qubits = 0;
    Eigen::VectorXcd amplitudes;

    Statevector() = default;
    explicit Statevector(int nq);
    static Statevector zero_state(int nq);

    double norm() const { return amplitudes.norm(); }
    std::int64_t dim() const { return std::int64_t(1) << n_qubits; }
};

inline constexpr int kDenseQubitLimit = 24;

cdouble overlap(const Statevector& a, const Statevector& b);

void apply_gate_inplace(const Gate& g, Statevector& s);
Statevector apply_circuit(const Circuit& c, const Statevector& s);

/// JW ladder operator c_alpha (dagger=false) or c^dag_alpha applied directly.
Statevector apply_ladder(int alpha, bool dagger, const Statevector& s);

double expectation(const PauliHamiltonian& h, const Statevector& s);
Statevector apply_pauli_sum(const PauliHamiltonian& h, const Statevector& s);

/// One adjacent-mode Givens rotation plus phases, realized as a 2-qubit matchgate.
struct GivensLayer {
    int mode;               // acts on modes (mode, mode+1)
    Eigen::Matrix2cd rot;   // 2x2 unitary on the one-particle amplitudes
};

/// Decompose a one-particle unitary u into adjacent Givens rotations and
/// per-mode phases; application order is phases first, then layers in stored
/// order. Used for the exact quadratic evolution.
struct GivensNetwork {
    Eigen::VectorXcd phases;
    std::vector<GivensLayer> layers;
};
GivensNetwork givens_decompose(const Eigen::MatrixXcd& u);

/// Symmetric Trotter propagator
/// U(dt) = [exp(-i Hint tau/2) exp(-i H0 tau) exp(-i Hint tau/2)]^{n_T}, tau = dt/n_T.
/// The quadratic factor is exact (Givens network of the one-particle evolution),
/// the interaction factor is a dense gate on the impurity qubits.
class TrotterPropagator {
  public:
    TrotterPropagator(const HamiltonianSplit& split, double dt, int n_trotter);

    void apply_inplace(Statevector& s, bool inverse = false) const;
    Statevector apply(const Statevector& s, bool inverse = false) const;

    double dt() const { return dt_; }
    int n_trotter() const { return n_trotter_; }

  private:
    double dt_;
    int n_trotter_;
    int n_sites_;
    Gate hint_half_;          // exp(-i Hint tau/2) on impurity qubits
    Gate hint_half_inv_;
    GivensNetwork quad_;      // exp(-i h tau) per spin sector
    GivensNetwork quad_inv_;
    bool has_hint_ = false;

    void apply_quadratic(const GivensNetwork& net, Statevector& s) const;
};

}  // namespace aimq
