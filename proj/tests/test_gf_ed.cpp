#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aimq/ed.hpp"
#include "aimq/gf.hpp"
#include "aimq/model.hpp"
#include "oracles.hpp"

using namespace aimq;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

AimModel acceptance_model() {
    AimModel m;
    m.n_imp = 1;
    m.n_bath = 3;
    m.U = 4.0;
    m.J = 0.0;
    m.eps_imp = MatrixXcd::Constant(1, 1, -2.0);
    m.eps_bath = MatrixXcd::Zero(3, 3);
    m.eps_bath(0, 0) = -1.0;
    m.eps_bath(2, 2) = 1.0;
    m.V = MatrixXcd::Zero(1, 3);
    m.V(0, 0) = 0.6;
    m.V(0, 1) = 0.5;
    m.V(0, 2) = 0.6;
    return m;
}

AimModel resonant_level(double v) {
    AimModel m;
    m.n_imp = 1;
    m.n_bath = 1;
    m.U = 0.0;
    m.eps_imp = MatrixXcd::Zero(1, 1);
    m.eps_bath = MatrixXcd::Zero(1, 1);
    m.V = MatrixXcd::Constant(1, 1, v);
    return m;
}

}  // namespace

TEST_CASE("ed_ground_state") {
    SUBCASE("U=0 gives the filled Fermi sea") {
        AimModel m = acceptance_model();
        m.U = 0.0;
        m.eps_imp(0, 0) = 0.0;
        auto [H, split] = build_hamiltonian(m);
        EdResult r = ed_ground_state(H);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(split.h0_single_particle);
        double eref = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) eref += std::min(0.0, es.eigenvalues()[i]);
        CHECK(r.energy == doctest::Approx(eref).epsilon(1e-10));
    }
    SUBCASE("hubbard atom") {
        AimModel m;
        m.n_imp = 1;
        m.n_bath = 0;
        m.U = 4.0;
        m.eps_imp = MatrixXcd::Constant(1, 1, -2.0);
        m.eps_bath = MatrixXcd::Zero(0, 0);
        m.V = MatrixXcd::Zero(1, 0);
        auto [H, split] = build_hamiltonian(m);
        EdResult r = ed_ground_state(H);
        CHECK(r.energy == doctest::Approx(-2.0).epsilon(1e-12));
    }
    SUBCASE("iterative path agrees with dense path") {
        auto [H, split] = build_hamiltonian(acceptance_model());
        EdResult dense = ed_ground_state(H);
        EdOptions opts;
        opts.dense_limit = 4;  // force the Lanczos path on 8 qubits
        EdResult sparse = ed_ground_state(H, opts);
        CHECK(sparse.energy == doctest::Approx(dense.energy).epsilon(1e-9));
        CHECK(std::abs(std::abs(overlap(sparse.ground_state, dense.ground_state)) - 1.0) < 1e-7);
        const double resid =
            (H.apply(sparse.ground_state.amplitudes) - sparse.energy * sparse.ground_state.amplitudes)
                .norm();
        CHECK(resid < 1e-8);
    }
}

TEST_CASE("ed_green_function") {
    SUBCASE("resonant level has poles at +-V") {
        auto [H, split] = build_hamiltonian(resonant_level(0.5));
        EdResult r = ed_ground_state(H);
        ContinuedFraction gg = ed_green_function(r, H, 0, GfBranch::Greater);
        ContinuedFraction gl = ed_green_function(r, H, 0, GfBranch::Lesser);
        // closed form: G(z) = 1 / (z - V^2 / z)
        for (double w : {0.3, 1.1, -0.7, 2.5}) {
            const cdouble z(w, 0.1);
            const cdouble ref = 1.0 / (z - 0.25 / z);
            CHECK(std::abs(retarded_gf(gg, gl, z) - ref) < 1e-8);
        }
    }
    SUBCASE("hubbard atom spin-averaged retarded GF has weight-1/2 poles at +-U/2") {
        AimModel m;
        m.n_imp = 1;
        m.n_bath = 0;
        m.U = 4.0;
        m.eps_imp = MatrixXcd::Constant(1, 1, -2.0);
        m.eps_bath = MatrixXcd::Zero(0, 0);
        m.V = MatrixXcd::Zero(1, 0);
        auto [H, split] = build_hamiltonian(m);
        EdResult r = ed_ground_state(H);
        auto gf_for = [&](int alpha, cdouble z) {
            ContinuedFraction gg = ed_green_function(r, H, alpha, GfBranch::Greater);
            ContinuedFraction gl = ed_green_function(r, H, alpha, GfBranch::Lesser);
            return retarded_gf(gg, gl, z);
        };
        for (double w : {0.7, -1.3, 3.1}) {
            const cdouble z(w, 0.2);
            const cdouble avg = 0.5 * (gf_for(0, z) + gf_for(1, z));
            const cdouble ref = 0.5 / (z - 2.0) + 0.5 / (z + 2.0);
            CHECK(std::abs(avg - ref) < 1e-9);
        }
    }
    SUBCASE("sum rule and causality on the interacting model") {
        auto [H, split] = build_hamiltonian(acceptance_model());
        EdResult r = ed_ground_state(H);
        ContinuedFraction gg = ed_green_function(r, H, 0, GfBranch::Greater);
        ContinuedFraction gl = ed_green_function(r, H, 0, GfBranch::Lesser);
        CHECK(gg.prefactor + gl.prefactor == doctest::Approx(1.0).epsilon(1e-10));
        auto grid = default_omega_grid(-20, 20, 4001);
        DosCurve d = dos([&](cdouble z) { return retarded_gf(gg, gl, z); }, grid, 0.1);
        double integral = 0;
        for (size_t i = 1; i < d.omega.size(); ++i) {
            CHECK(d.dos[i] >= -1e-10);
            integral += 0.5 * (d.dos[i] + d.dos[i - 1]) * (d.omega[i] - d.omega[i - 1]);
        }
        CHECK(integral > 0.95);
        CHECK(integral < 1.05);
    }
}

TEST_CASE("continued fraction evaluation") {
    ContinuedFraction cf;
    cf.branch = GfBranch::Greater;
    cf.prefactor = 1.0;
    cf.a = {0.5};
    CHECK(std::abs(eval_continued_fraction(cf, cdouble(1.5, 0)) - 1.0) < 1e-14);

    ContinuedFraction cf2;
    cf2.branch = GfBranch::Greater;
    cf2.prefactor = 1.0;
    cf2.a = {0.0, 0.0};
    cf2.b_sq = {1.0};
    // 1/(z - 1/z), poles at +-1
    for (double w : {0.4, 2.2}) {
        const cdouble z(w, 0.05);
        CHECK(std::abs(eval_continued_fraction(cf2, z) - 1.0 / (z - 1.0 / z)) < 1e-12);
    }
    // lesser branch flips the sign of a
    ContinuedFraction cfl = cf;
    cfl.branch = GfBranch::Lesser;
    CHECK(std::abs(eval_continued_fraction(cfl, cdouble(1.5, 0)) - 1.0 / (1.5 + 0.5)) < 1e-14);
}

TEST_CASE("krylov matrices") {
    auto [H, split] = build_hamiltonian(acceptance_model());
    EdResult ed = ed_ground_state(H);
    QsegConfig cfg;
    cfg.dt = 0.05;
    cfg.n_l = 12;
    cfg.n_trotter = 1;
    TrotterPropagator prop(split, cfg.dt, cfg.n_trotter);

    SUBCASE("S(0,0) is 1 - <n> for the greater branch") {
        KrylovData k = build_krylov_matrices(ed.ground_state, ed.energy, 0, GfBranch::Greater, cfg,
                                             prop, H);
        PauliHamiltonian n0;
        n0.n_qubits = 8;
        n0.terms.push_back({0.5, PauliString{}});
        n0.terms.push_back({-0.5, PauliString{{{0, 'Z'}}}});
        const double occ = expectation(n0, ed.ground_state);
        const int c = cfg.n_l;
        CHECK(k.S(c, c).real() == doctest::Approx(1.0 - occ).epsilon(1e-10));
        CHECK(k.b0_sq == doctest::Approx(1.0 - occ).epsilon(1e-10));
    }
    SUBCASE("S is exactly Toeplitz and PSD, H hermitian") {
        KrylovData k = build_krylov_matrices(ed.ground_state, ed.energy, 0, GfBranch::Greater, cfg,
                                             prop, H);
        const int dim = 2 * cfg.n_l + 1;
        for (int i = 1; i < dim; ++i)
            for (int j = 1; j < dim; ++j) CHECK(std::abs(k.S(i, j) - k.S(i - 1, j - 1)) < 1e-14);
        CHECK((k.H - k.H.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(k.S);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
    SUBCASE("exact evolution makes H Toeplitz (noninteracting case)") {
        AimModel m = acceptance_model();
        m.U = 0.0;
        m.eps_imp(0, 0) = 0.3;
        auto [H0, s0] = build_hamiltonian(m);
        EdResult e0 = ed_ground_state(H0);
        TrotterPropagator p0(s0, cfg.dt, 1);
        KrylovData k = build_krylov_matrices(e0.ground_state, e0.energy, 0, GfBranch::Greater, cfg,
                                             p0, H0);
        const int dim = 2 * cfg.n_l + 1;
        for (int i = 1; i < dim; ++i)
            for (int j = 1; j < dim; ++j) CHECK(std::abs(k.H(i, j) - k.H(i - 1, j - 1)) < 1e-10);
    }
    SUBCASE("toeplitz-H deviation shrinks with dt") {
        auto deviation = [&](double dt) {
            QsegConfig c2 = cfg;
            c2.dt = dt;
            c2.n_l = 8;
            TrotterPropagator p(split, dt, 1);
            KrylovData full = build_krylov_matrices(ed.ground_state, ed.energy, 0,
                                                    GfBranch::Greater, c2, p, H);
            c2.toeplitz_h = true;
            KrylovData toe = build_krylov_matrices(ed.ground_state, ed.energy, 0,
                                                   GfBranch::Greater, c2, p, H);
            return (full.H - toe.H).cwiseAbs().maxCoeff();
        };
        const double d1 = deviation(0.1);
        const double d2 = deviation(0.05);
        CHECK(d1 / d2 > 3.0);
    }
    SUBCASE("empty orbital gives a degenerate marker") {
        Statevector vac = Statevector::zero_state(8);
        KrylovData k = build_krylov_matrices(vac, 0.0, 0, GfBranch::Lesser, cfg, prop, H);
        CHECK(k.degenerate);
        ContinuedFraction cf = lanczos_from_matrices(k, 1e-8);
        CHECK(eval_continued_fraction(cf, cdouble(0.5, 0.1)) == cdouble(0, 0));
    }
}

TEST_CASE("qseg pipeline against ED") {
    auto [H, split] = build_hamiltonian(acceptance_model());
    EdResult ed = ed_ground_state(H);

    SUBCASE("first moment matches with exact (U=0) evolution") {
        AimModel m = acceptance_model();
        m.U = 0.0;
        m.eps_imp(0, 0) = 0.3;
        auto [H0, s0] = build_hamiltonian(m);
        EdResult e0 = ed_ground_state(H0);
        QsegConfig cfg;
        cfg.dt = 0.05;
        cfg.n_l = 10;
        TrotterPropagator p0(s0, cfg.dt, 1);
        KrylovData k = build_krylov_matrices(e0.ground_state, e0.energy, 0, GfBranch::Greater, cfg,
                                             p0, H0);
        ContinuedFraction qs = lanczos_from_matrices(k, 1e-8);
        ContinuedFraction ex = ed_green_function(e0, H0, 0, GfBranch::Greater);
        CHECK(qs.a[0] == doctest::Approx(ex.a[0]).epsilon(1e-8));
    }
    SUBCASE("8-qubit DOS matches the ED DOS") {
        QsegConfig cfg;
        cfg.dt = 0.05;
        cfg.n_l = 100;
        TrotterPropagator prop(split, cfg.dt, cfg.n_trotter);
        KrylovData kg = build_krylov_matrices(ed.ground_state, ed.energy, 0, GfBranch::Greater, cfg,
                                              prop, H);
        KrylovData kl = build_krylov_matrices(ed.ground_state, ed.energy, 0, GfBranch::Lesser, cfg,
                                              prop, H);
        ContinuedFraction qg = lanczos_from_matrices(kg, cfg.s_regularization);
        ContinuedFraction ql = lanczos_from_matrices(kl, cfg.s_regularization);
        ContinuedFraction eg = ed_green_function(ed, H, 0, GfBranch::Greater);
        ContinuedFraction el = ed_green_function(ed, H, 0, GfBranch::Lesser);
        auto grid = default_omega_grid();
        DosCurve dq = dos([&](cdouble z) { return retarded_gf(qg, ql, z); }, grid, 0.1);
        DosCurve de = dos([&](cdouble z) { return retarded_gf(eg, el, z); }, grid, 0.1);
        double maxdev = 0, l2 = 0, ref = 0;
        for (size_t i = 0; i < grid.size(); ++i) {
            maxdev = std::max(maxdev, std::abs(dq.dos[i] - de.dos[i]));
            l2 += std::pow(dq.dos[i] - de.dos[i], 2);
            ref += std::pow(de.dos[i], 2);
        }
        CHECK(maxdev <= 0.02);
        CHECK(std::sqrt(l2 / ref) <= 0.02);
    }
    SUBCASE("lanczos output is invariant under phi_0 rescaling") {
        QsegConfig cfg;
        cfg.dt = 0.05;
        cfg.n_l = 10;
        TrotterPropagator prop(split, cfg.dt, cfg.n_trotter);
        Statevector phi0 = apply_ladder(0, true, ed.ground_state);
        KrylovData k1 = build_krylov_matrices_from_phi0(phi0, ed.energy, GfBranch::Greater, cfg,
                                                        prop, H);
        Statevector phi_scaled = phi0;
        phi_scaled.amplitudes *= 3.7;
        KrylovData k2 = build_krylov_matrices_from_phi0(phi_scaled, ed.energy, GfBranch::Greater,
                                                        cfg, prop, H);
        ContinuedFraction c1 = lanczos_from_matrices(k1, 1e-8);
        ContinuedFraction c2 = lanczos_from_matrices(k2, 1e-8);
        REQUIRE(c1.a.size() == c2.a.size());
        for (size_t i = 0; i < c1.a.size(); ++i) CHECK(c1.a[i] == doctest::Approx(c2.a[i]).epsilon(1e-10));
        for (size_t i = 0; i < c1.b_sq.size(); ++i)
            CHECK(c1.b_sq[i] == doctest::Approx(c2.b_sq[i]).epsilon(1e-10));
        CHECK(c2.prefactor == doctest::Approx(c1.prefactor * 3.7 * 3.7).epsilon(1e-10));
    }
}

TEST_CASE("offdiagonal gf") {
    SUBCASE("alpha = beta reduces to the diagonal") {
        auto [H, split] = build_hamiltonian(acceptance_model());
        EdResult ed = ed_ground_state(H);
        const int a = 0;
        Statevector pa = apply_ladder(a, true, ed.ground_state);
        Statevector p1 = pa;
        p1.amplitudes *= 2.0;  // (c_a + c_a)^dag
        Statevector p2 = pa;
        p2.amplitudes *= cdouble(1.0, 1.0);  // (c_a + i c_a)^dag
        ContinuedFraction g1 = ed_green_function_from_phi0(ed, H, p1, GfBranch::Greater);
        ContinuedFraction g2 = ed_green_function_from_phi0(ed, H, p2, GfBranch::Greater);
        ContinuedFraction gd = ed_green_function(ed, H, a, GfBranch::Greater);
        for (double w : {0.5, -1.5, 3.0}) {
            const cdouble z(w, 0.1);
            const cdouble off = offdiagonal_gf(g1, g2, gd, gd, z);
            CHECK(std::abs(off - eval_continued_fraction(gd, z)) < 1e-8);
        }
    }
    SUBCASE("noninteracting two-orbital model matches the matrix resolvent") {
        // two impurity orbitals with hopping t, no bath, U = 0
        AimModel m;
        m.n_imp = 2;
        m.n_bath = 0;
        m.U = 0.0;
        m.eps_imp = MatrixXcd::Zero(2, 2);
        m.eps_imp(0, 0) = 0.2;
        m.eps_imp(1, 1) = -0.1;
        m.eps_imp(0, 1) = m.eps_imp(1, 0) = 0.35;
        m.eps_bath = MatrixXcd::Zero(0, 0);
        m.V = MatrixXcd::Zero(2, 0);
        auto [H, split] = build_hamiltonian(m);
        EdResult ed = ed_ground_state(H);
        const int a = 0, b = 1;  // both up-spin orbitals
        Statevector pa = apply_ladder(a, true, ed.ground_state);
        Statevector pb = apply_ladder(b, true, ed.ground_state);
        Statevector p1 = pa, p2 = pa;
        p1.amplitudes += pb.amplitudes;
        p2.amplitudes += cdouble(0, 1) * pb.amplitudes;
        ContinuedFraction g1g = ed_green_function_from_phi0(ed, H, p1, GfBranch::Greater);
        ContinuedFraction g2g = ed_green_function_from_phi0(ed, H, p2, GfBranch::Greater);
        ContinuedFraction gag = ed_green_function(ed, H, a, GfBranch::Greater);
        ContinuedFraction gbg = ed_green_function(ed, H, b, GfBranch::Greater);
        Statevector la = apply_ladder(a, false, ed.ground_state);
        Statevector lb = apply_ladder(b, false, ed.ground_state);
        Statevector l1 = la, l2 = la;
        l1.amplitudes += lb.amplitudes;
        // lesser auxiliary states mirror the greater combinations
        l2.amplitudes += cdouble(0, -1) * lb.amplitudes;
        ContinuedFraction g1l = ed_green_function_from_phi0(ed, H, l1, GfBranch::Lesser);
        ContinuedFraction g2l = ed_green_function_from_phi0(ed, H, l2, GfBranch::Lesser);
        ContinuedFraction gal = ed_green_function(ed, H, a, GfBranch::Lesser);
        ContinuedFraction gbl = ed_green_function(ed, H, b, GfBranch::Lesser);
        for (double w : {0.9, -0.8, 2.3}) {
            const cdouble z(w, 0.15);
            const cdouble off = offdiagonal_gf(g1g, g2g, gag, gbg, z) +
                                offdiagonal_gf(g1l, g2l, gal, gbl, z);
            Eigen::Matrix2cd res = (z * Eigen::Matrix2cd::Identity() -
                                    Eigen::Matrix2cd(m.eps_imp))
                                       .inverse();
            CHECK(std::abs(off - res(0, 1)) < 1e-6);
        }
    }
    SUBCASE("decoupled orbitals give zero off-diagonal GF") {
        AimModel m;
        m.n_imp = 2;
        m.n_bath = 0;
        m.U = 0.0;
        m.eps_imp = MatrixXcd::Zero(2, 2);
        m.eps_imp(0, 0) = 0.4;
        m.eps_imp(1, 1) = -0.4;
        m.eps_bath = MatrixXcd::Zero(0, 0);
        m.V = MatrixXcd::Zero(2, 0);
        auto [H, split] = build_hamiltonian(m);
        EdResult ed = ed_ground_state(H);
        Statevector pa = apply_ladder(0, true, ed.ground_state);
        Statevector pb = apply_ladder(1, true, ed.ground_state);
        Statevector p1 = pa, p2 = pa;
        p1.amplitudes += pb.amplitudes;
        p2.amplitudes += cdouble(0, 1) * pb.amplitudes;
        ContinuedFraction g1 = ed_green_function_from_phi0(ed, H, p1, GfBranch::Greater);
        ContinuedFraction g2 = ed_green_function_from_phi0(ed, H, p2, GfBranch::Greater);
        ContinuedFraction ga = ed_green_function(ed, H, 0, GfBranch::Greater);
        ContinuedFraction gb = ed_green_function(ed, H, 1, GfBranch::Greater);
        for (double w : {0.6, -2.0}) {
            const cdouble z(w, 0.1);
            CHECK(std::abs(offdiagonal_gf(g1, g2, ga, gb, z)) < 1e-8);
        }
    }
}
