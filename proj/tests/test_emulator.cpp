#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aimq/emulator.hpp"
#include "aimq/model.hpp"
#include "oracles.hpp"

using namespace aimq;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

Statevector random_state(int nq, std::mt19937& rng) {
    Statevector s(nq);
    std::normal_distribution<double> nd;
    for (auto& a : s.amplitudes.reshaped()) a = cdouble(nd(rng), nd(rng));
    s.amplitudes /= s.amplitudes.norm();
    return s;
}

AimModel test_model(int n_bath, double U) {
    AimModel m;
    m.n_imp = 1;
    m.n_bath = n_bath;
    m.eps_imp = MatrixXcd::Constant(1, 1, -U / 2);
    m.U = U;
    m.eps_bath = MatrixXcd::Zero(n_bath, n_bath);
    m.V = MatrixXcd::Zero(1, n_bath);
    for (int k = 0; k < n_bath; ++k) {
        m.eps_bath(k, k) = (n_bath == 1) ? 0.0 : -1.0 + 2.0 * k / (n_bath - 1);
        m.V(0, k) = 0.45 + 0.1 * k;
    }
    return m;
}

}  // namespace

TEST_CASE("basic gates") {
    // rotation equivalent to X on |0> -> |1>
    Statevector s = Statevector::zero_state(1);
    apply_gate_inplace(Gate::rx(0, M_PI), s);
    CHECK(std::abs(s.amplitudes[1]) == doctest::Approx(1.0));

    // CNOT on |10> (qubit 0 set, control 0) -> |11>
    Statevector t = Statevector::zero_state(2);
    t.amplitudes[0] = 0;
    t.amplitudes[1] = 1;  // qubit 0 occupied
    apply_gate_inplace(Gate::cnot(0, 1), t);
    CHECK(std::abs(t.amplitudes[3]) == doctest::Approx(1.0));
}

TEST_CASE("gate application matches dense kron oracle") {
    std::mt19937 rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const int nq = 5;
        Statevector s = random_state(nq, rng);
        Circuit c;
        c.n_qubits = nq;
        std::uniform_int_distribution<int> qd(0, nq - 1);
        std::uniform_real_distribution<double> ad(-3, 3);
        c.append(Gate::rx(qd(rng), ad(rng)));
        c.append(Gate::ry(qd(rng), ad(rng)));
        c.append(Gate::rz(qd(rng), ad(rng)));
        int a = qd(rng), b = qd(rng);
        if (a == b) b = (b + 1) % nq;
        c.append(Gate::cnot(a, b));
        // random 2-qubit block on non-adjacent qubits
        std::vector<int> qs = {0, 3};
        c.append(Gate::unitary(qs, oracle::random_unitary(4, rng)));

        Statevector out = apply_circuit(c, s);
        VectorXcd ref = oracle::dense_circuit_unitary(c) * s.amplitudes;
        CHECK((out.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("apply_ladder") {
    SUBCASE("creation on vacuum") {
        Statevector vac = Statevector::zero_state(3);
        Statevector s = apply_ladder(0, true, vac);
        CHECK(std::abs(s.amplitudes[1] - 1.0) < 1e-15);
        Statevector z = apply_ladder(0, false, vac);
        CHECK(z.norm() < 1e-15);
    }
    SUBCASE("matches dense JW ladder with strings") {
        std::mt19937 rng(5);
        for (int rep = 0; rep < 20; ++rep) {
            const int nq = 4;
            Statevector s = random_state(nq, rng);
            for (int p = 0; p < nq; ++p) {
                for (bool dag : {false, true}) {
                    Statevector got = apply_ladder(p, dag, s);
                    VectorXcd ref = oracle::dense_ladder(p, dag, nq) * s.amplitudes;
                    CHECK((got.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-13);
                }
            }
        }
    }
    SUBCASE("anticommutation sum rule on random states") {
        std::mt19937 rng(6);
        for (int rep = 0; rep < 100; ++rep) {
            const int nq = 6;
            Statevector s = random_state(nq, rng);
            std::uniform_int_distribution<int> qd(0, nq - 1);
            const int p = qd(rng);
            const double w1 = std::pow(apply_ladder(p, true, s).norm(), 2);
            const double w2 = std::pow(apply_ladder(p, false, s).norm(), 2);
            CHECK(w1 + w2 == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("expectation") {
    PauliHamiltonian z0;
    z0.n_qubits = 1;
    z0.terms.push_back({1.0, PauliString{{{0, 'Z'}}}});
    CHECK(expectation(z0, Statevector::zero_state(1)) == doctest::Approx(1.0));

    std::mt19937 rng(8);
    AimModel m = test_model(2, 3.0);
    auto [H, split] = build_hamiltonian(m);
    Statevector s = random_state(H.n_qubits, rng);
    MatrixXcd hd = oracle::dense_hamiltonian(H);
    const double ref = (s.amplitudes.adjoint() * hd * s.amplitudes)(0).real();
    CHECK(expectation(H, s) == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("givens network reproduces one-particle evolution") {
    std::mt19937 rng(13);
    const int M = 4;
    AimModel m = test_model(M - 1, 0.0);
    auto [H, split] = build_hamiltonian(m);

    for (double t : {0.1, 0.7}) {
        TrotterPropagator prop(split, t, 1);
        // U = 0 so the propagator is exactly exp(-i H t)
        MatrixXcd hd = oracle::dense_hamiltonian(H);
        MatrixXcd uref = oracle::matrix_exponential_i(hd, t);
        Statevector s = random_state(2 * M, rng);
        Statevector got = prop.apply(s);
        VectorXcd ref = uref * s.amplitudes;
        CHECK((got.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-10);
        // inverse undoes
        Statevector back = prop.apply(got, /*inverse=*/true);
        CHECK((back.amplitudes - s.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("symmetric trotter error is third order per step") {
    AimModel m = test_model(3, 4.0);
    auto [H, split] = build_hamiltonian(m);
    MatrixXcd hd = oracle::dense_hamiltonian(H);
    std::mt19937 rng(17);
    Statevector s = random_state(8, rng);

    std::vector<double> errs;
    for (double dt : {0.2, 0.1, 0.05}) {
        TrotterPropagator prop(split, dt, 1);
        Statevector got = prop.apply(s);
        VectorXcd ref = oracle::matrix_exponential_i(hd, dt) * s.amplitudes;
        errs.push_back((got.amplitudes - ref).norm());
        CHECK(got.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
    // third order: halving dt cuts the one-step error by ~8
    CHECK(errs[0] / errs[1] > 5.0);
    CHECK(errs[1] / errs[2] > 5.0);

    SUBCASE("U(dt) applied n times equals one propagator over n dt within trotter error") {
        TrotterPropagator prop(split, 0.05, 1);
        TrotterPropagator prop4(split, 0.2, 4);
        Statevector a = s;
        for (int k = 0; k < 4; ++k) a = prop.apply(a);
        Statevector b = prop4.apply(s);
        CHECK((a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("propagator conserves particle number") {
        TrotterPropagator prop(split, 0.1, 2);
        PauliHamiltonian N = number_operator(8);
        Statevector evolved = prop.apply(s);
        CHECK(expectation(N, evolved) == doctest::Approx(expectation(N, s)).epsilon(1e-10));
    }
}

TEST_CASE("hint-free propagator is exact") {
    AimModel m = test_model(2, 0.0);
    auto [H, split] = build_hamiltonian(m);
    MatrixXcd hd = oracle::dense_hamiltonian(H);
    std::mt19937 rng(23);
    Statevector s = random_state(6, rng);
    TrotterPropagator prop(split, 0.3, 1);
    VectorXcd ref = oracle::matrix_exponential_i(hd, 0.3) * s.amplitudes;
    CHECK((prop.apply(s).amplitudes - ref).cwiseAbs().maxCoeff() < 1e-10);
}
