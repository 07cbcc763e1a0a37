#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aimq/model.hpp"
#include "aimq/pauli.hpp"
#include "oracles.hpp"

using namespace aimq;
using Eigen::MatrixXcd;

namespace {

AimModel hubbard_atom(double U) {
    AimModel m;
    m.n_imp = 1;
    m.n_bath = 0;
    m.eps_imp = MatrixXcd::Constant(1, 1, -U / 2);
    m.U = U;
    m.eps_bath = MatrixXcd::Zero(0, 0);
    m.V = MatrixXcd::Zero(1, 0);
    return m;
}

AimModel small_aim(int n_bath, double U) {
    AimModel m;
    m.n_imp = 1;
    m.n_bath = n_bath;
    m.eps_imp = MatrixXcd::Constant(1, 1, -U / 2);
    m.U = U;
    m.eps_bath = MatrixXcd::Zero(n_bath, n_bath);
    m.V = MatrixXcd::Zero(1, n_bath);
    for (int k = 0; k < n_bath; ++k) {
        m.eps_bath(k, k) = -1.0 + 2.0 * k / std::max(1, n_bath - 1);
        m.V(0, k) = 0.5;
    }
    return m;
}

}  // namespace

TEST_CASE("spin_orbital_index ordering") {
    CHECK(spin_orbital_index(0, 0, 12) == 0);
    CHECK(spin_orbital_index(0, 1, 12) == 12);
    CHECK(spin_orbital_index(3, 1, 12) == 15);
    CHECK_THROWS_AS(spin_orbital_index(12, 0, 12), std::out_of_range);
}

TEST_CASE("jordan_wigner basics") {
    // c^dag_0 on 2 qubits: (X - iY)/2, no Z string
    FermionTerm t{1.0, {{0, true}}};
    auto h = jordan_wigner(t, 2);
    REQUIRE(h.terms.size() == 2);
    MatrixXcd dense = oracle::dense_hamiltonian(h);
    CHECK((dense - oracle::dense_ladder(0, true, 2)).cwiseAbs().maxCoeff() < 1e-14);

    // n_0 = c^dag_0 c_0 -> (I - Z_0)/2
    FermionTerm n0{1.0, {{0, true}, {0, false}}};
    auto hn = jordan_wigner(n0, 1);
    MatrixXcd d = oracle::dense_hamiltonian(hn);
    MatrixXcd ref(2, 2);
    ref << 0, 0, 0, 1;
    CHECK((d - ref).cwiseAbs().maxCoeff() < 1e-14);

    // hopping c^dag_0 c_2 + h.c. -> (X Z X + Y Z Y)/2
    std::vector<FermionTerm> hop{{1.0, {{0, true}, {2, false}}}, {1.0, {{2, true}, {0, false}}}};
    auto hh = jordan_wigner(hop, 3);
    MatrixXcd lhs = oracle::dense_hamiltonian(hh);
    MatrixXcd rhs = oracle::dense_fermion_term(hop[0], 3) + oracle::dense_fermion_term(hop[1], 3);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
    // structure: two terms with coefficient 1/2 (XZX and YZY)
    CHECK(hh.terms.size() == 2);
    for (const auto& term : hh.terms) CHECK(std::abs(term.coeff - cdouble(0.5, 0)) < 1e-14);
}

TEST_CASE("jordan_wigner random hermitian sums stay hermitian and match brute force") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> qd(0, 4);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 100; ++rep) {
        const int nq = 5;
        std::vector<FermionTerm> terms;
        for (int k = 0; k < 3; ++k) {
            FermionTerm t;
            t.coeff = cdouble(nd(rng), nd(rng));
            const int len = 1 + (qd(rng) % 3);
            for (int l = 0; l < len; ++l) t.ops.push_back({qd(rng), qd(rng) % 2 == 0});
            terms.push_back(t);
            terms.push_back(t.dagger());
        }
        auto h = jordan_wigner(terms, nq);
        CHECK(h.is_hermitian());
        MatrixXcd lhs = oracle::dense_hamiltonian(h);
        MatrixXcd rhs = MatrixXcd::Zero(32, 32);
        for (const auto& t : terms) rhs += oracle::dense_fermion_term(t, nq);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kanamori_terms structure") {
    SUBCASE("single orbital reduces to Hubbard U") {
        auto terms = kanamori_terms(4.0, 0.0, 1, 1);
        REQUIRE(terms.size() == 1);
        CHECK(terms[0].coeff == cdouble(4.0, 0.0));
        REQUIRE(terms[0].ops.size() == 4);
        CHECK(terms[0].ops[0].orbital == 0);
        CHECK(terms[0].ops[2].orbital == 1);
    }
    SUBCASE("two orbitals carry U, U-2J, U-3J density coefficients") {
        auto terms = kanamori_terms(4.0, 1.0, 2, 2);
        std::set<double> coeffs;
        for (const auto& t : terms)
            if (t.ops.size() == 4 && t.ops[0].orbital == t.ops[1].orbital && t.ops[2].orbital == t.ops[3].orbital)
                coeffs.insert(t.coeff.real());
        CHECK(coeffs.count(4.0) == 1);   // U
        CHECK(coeffs.count(2.0) == 1);   // U - 2J
        CHECK(coeffs.count(1.0) == 1);   // U - 3J
    }
    SUBCASE("term counts for n_imp = 3 match direct enumeration of the sums") {
        auto terms = kanamori_terms(4.0, 0.7, 3, 3);
        // brute-force enumeration: same-orbital density (3), cross density 2 per
        // (pair, sigma) over 3 pairs and 2 sigmas (12), spin-flip 2 and pair-hop 2
        // monomials per pair (12)
        CHECK(terms.size() == 3 + 12 + 12);
        auto h = jordan_wigner(terms, 6);
        CHECK(h.is_hermitian());
    }
    SUBCASE("kanamori sum is hermitian") {
        for (double J : {0.0, 0.3, 1.1}) {
            auto terms = kanamori_terms(3.0, J, 3, 5);
            MatrixXcd d = MatrixXcd::Zero(1 << 6, 1 << 6);
            // put on 6 qubits: 3 sites both spins -> indices within 2*5 = 10 too big for dense;
            // use n_sites = 3 for the dense check
            auto terms3 = kanamori_terms(3.0, J, 3, 3);
            for (const auto& t : terms3) d += oracle::dense_fermion_term(t, 6);
            CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("build_hamiltonian") {
    SUBCASE("hubbard atom at half filling has eigenvalues {0,-2,-2,0}") {
        auto [H, split] = build_hamiltonian(hubbard_atom(4.0));
        MatrixXcd d = oracle::dense_hamiltonian(H);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(d);
        Eigen::VectorXd w = es.eigenvalues();
        CHECK(w[0] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(std::abs(w[2]) < 1e-12);
        CHECK(std::abs(w[3]) < 1e-12);
    }
    SUBCASE("U=J=0 gives empty Hint") {
        AimModel m = small_aim(2, 0.0);
        m.eps_imp(0, 0) = 0.3;
        auto [H, split] = build_hamiltonian(m);
        CHECK(split.hint_terms.empty());
        MatrixXcd full = oracle::dense_hamiltonian(H);
        MatrixXcd h0 = oracle::dense_hamiltonian(quadratic_pauli(split.h0_single_particle));
        CHECK((full - h0).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("split reconstructs H on 1 impurity + 3 baths") {
        AimModel m = small_aim(3, 4.0);
        auto [H, split] = build_hamiltonian(m);
        MatrixXcd full = oracle::dense_hamiltonian(H);
        MatrixXcd h0 = oracle::dense_hamiltonian(quadratic_pauli(split.h0_single_particle));
        MatrixXcd hint = MatrixXcd::Zero(256, 256);
        for (const auto& t : split.hint_terms) hint += oracle::dense_fermion_term(t, 8);
        CHECK((full - (h0 + hint)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("particle number commutes with H") {
        std::mt19937 rng(7);
        std::normal_distribution<double> nd;
        for (int rep = 0; rep < 5; ++rep) {
            AimModel m = small_aim(2, 2.5);
            m.eps_imp(0, 0) = nd(rng);
            for (int k = 0; k < 2; ++k) {
                m.eps_bath(k, k) = nd(rng);
                m.V(0, k) = cdouble(nd(rng), nd(rng));
            }
            auto [H, split] = build_hamiltonian(m);
            MatrixXcd hd = oracle::dense_hamiltonian(H);
            MatrixXcd nd_ = oracle::dense_hamiltonian(number_operator(H.n_qubits));
            CHECK((hd * nd_ - nd_ * hd).cwiseAbs().maxCoeff() < 1e-11);
        }
    }
}

TEST_CASE("block_tridiagonalize") {
    SUBCASE("already tridiagonal input gives identity transform") {
        MatrixXcd t = MatrixXcd::Zero(4, 4);
        t(0, 0) = 1;
        t(1, 1) = -1;
        t(0, 1) = t(1, 0) = 0.5;
        t(1, 2) = t(2, 1) = 0.25;
        t(2, 3) = t(3, 2) = 0.125;
        auto [tb, q] = block_tridiagonalize(t, 1);
        CHECK((q - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((tb - t).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("star to chain preserves eigenvalues") {
        const int nb = 6;
        MatrixXcd t = MatrixXcd::Zero(nb + 1, nb + 1);
        for (int k = 0; k < nb; ++k) {
            t(1 + k, 1 + k) = -1.0 + 0.4 * k;
            t(0, 1 + k) = 0.3 + 0.05 * k;
            t(1 + k, 0) = std::conj(t(0, 1 + k));
        }
        auto [tb, q] = block_tridiagonalize(t, 1);
        CHECK((q * q.adjoint() - MatrixXcd::Identity(nb + 1, nb + 1)).cwiseAbs().maxCoeff() < 1e-10);
        // impurity untouched
        CHECK(std::abs(q(0, 0) - 1.0) < 1e-12);
        // chain geometry: |i-j| > 1 vanishes
        for (int i = 0; i < nb + 1; ++i)
            for (int j = 0; j < nb + 1; ++j)
                if (std::abs(i - j) > 1) CHECK(std::abs(tb(i, j)) < 1e-10);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> e1(t), e2(tb);
        CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("random hermitian 8x8 with 2x2 blocks") {
        std::mt19937 rng(3);
        std::normal_distribution<double> nd;
        MatrixXcd a(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) a(i, j) = cdouble(nd(rng), nd(rng));
        MatrixXcd t = (a + a.adjoint()) / 2;
        auto [tb, q] = block_tridiagonalize(t, 2);
        for (int bi = 0; bi < 4; ++bi)
            for (int bj = 0; bj < 4; ++bj)
                if (std::abs(bi - bj) > 1)
                    CHECK(tb.block(2 * bi, 2 * bj, 2, 2).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((q.adjoint() * t * q - tb).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> e1(t), e2(tb);
        CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK_THROWS_AS(block_tridiagonalize(a, 2), std::invalid_argument);
    }
}

TEST_CASE("library to_dense matches kron oracle (endianness pin)") {
    std::mt19937 rng(99);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
        PauliHamiltonian h;
        h.n_qubits = 4;
        const char letters[] = {'X', 'Y', 'Z'};
        std::uniform_int_distribution<int> ld(0, 2), qd(0, 3);
        for (int t = 0; t < 4; ++t) {
            PauliString s;
            std::set<int> qs;
            for (int k = 0; k < 2; ++k) qs.insert(qd(rng));
            for (int q : qs) s.ops.emplace_back(q, letters[ld(rng)]);
            h.terms.push_back({cdouble(nd(rng), nd(rng)), s});
        }
        CHECK((h.to_dense() - oracle::dense_hamiltonian(h)).cwiseAbs().maxCoeff() < 1e-13);
        Eigen::VectorXcd v(16);
        for (auto& a : v.reshaped()) a = cdouble(nd(rng), nd(rng));
        CHECK((h.apply(v) - oracle::dense_hamiltonian(h) * v).cwiseAbs().maxCoeff() < 1e-12);
    }
}
