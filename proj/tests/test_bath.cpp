#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aimq/bath.hpp"
#include "oracles.hpp"

using namespace aimq;
using Eigen::MatrixXcd;

TEST_CASE("matsubara_grid") {
    auto g = matsubara_grid(200.0, 1);
    CHECK(g[0] == doctest::Approx(M_PI / 200.0).epsilon(1e-14));
    auto g2 = matsubara_grid(100.0, 100);
    CHECK(g2.size() == 100);
    CHECK(g2[1] == doctest::Approx(3 * M_PI / 100).epsilon(1e-14));
    CHECK(g2[99] == doctest::Approx(199 * M_PI / 100).epsilon(1e-14));
    CHECK_THROWS_AS(matsubara_grid(-1.0, 3), std::invalid_argument);
}

TEST_CASE("discrete_hybridization") {
    SUBCASE("single pole") {
        BathParams b;
        b.eps_bath = MatrixXcd::Zero(1, 1);
        b.V = MatrixXcd::Constant(1, 1, 0.5);
        const cdouble got = discrete_hybridization(b, cdouble(0, 2))(0, 0);
        CHECK(std::abs(got - cdouble(0, -0.125)) < 1e-14);
    }
    SUBCASE("diagonal bath reproduces the sum over poles") {
        BathParams b;
        b.eps_bath = MatrixXcd::Zero(3, 3);
        b.V = MatrixXcd::Zero(1, 3);
        const double e[3] = {-0.7, 0.1, 1.3};
        const double v[3] = {0.4, 0.6, 0.2};
        for (int k = 0; k < 3; ++k) {
            b.eps_bath(k, k) = e[k];
            b.V(0, k) = v[k];
        }
        const cdouble z(0.3, 0.8);
        cdouble ref = 0;
        for (int k = 0; k < 3; ++k) ref += v[k] * v[k] / (z - e[k]);
        CHECK(std::abs(discrete_hybridization(b, z)(0, 0) - ref) < 1e-13);
    }
    SUBCASE("dense bath matches a brute-force inverse") {
        std::mt19937 rng(5);
        std::normal_distribution<double> nd;
        MatrixXcd a(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = cdouble(nd(rng), nd(rng));
        BathParams b;
        b.eps_bath = (a + a.adjoint()) / 2;
        b.V = MatrixXcd::Zero(1, 3);
        for (int k = 0; k < 3; ++k) b.V(0, k) = cdouble(nd(rng), nd(rng));
        const cdouble z(0, 0.3);
        MatrixXcd ref = b.V *
                        (z * MatrixXcd::Identity(3, 3) - b.eps_bath).inverse() * b.V.adjoint();
        CHECK((discrete_hybridization(b, z) - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("bethe hybridization closed form") {
    SUBCASE("normalization at large z") {
        const cdouble z(0, 1000.0);
        CHECK(std::abs(z * bethe_hybridization_matsubara(z) - 1.0) < 1e-3);
    }
    SUBCASE("matches adaptive quadrature") {
        // Simpson quadrature of (1/2pi) sqrt(4 - w^2) / (z - w)
        auto quad = [](cdouble z) {
            const int N = 200000;
            cdouble acc = 0;
            for (int i = 0; i < N; ++i) {
                const double w0 = -2.0 + 4.0 * i / N;
                const double w1 = -2.0 + 4.0 * (i + 1) / N;
                const double wm = (w0 + w1) / 2;
                auto f = [&](double w) {
                    return std::sqrt(std::max(0.0, 4 - w * w)) / (2 * M_PI) / (z - w);
                };
                acc += (w1 - w0) / 6.0 * (f(w0) + 4.0 * f(wm) + f(w1));
            }
            return acc;
        };
        for (cdouble z : {cdouble(0, 2), cdouble(0.7, 1.1), cdouble(-0.4, 0.5)}) {
            CHECK(std::abs(bethe_hybridization_matsubara(z) - quad(z)) < 1e-9);
        }
    }
    SUBCASE("reflection symmetry") {
        const cdouble z(0.37, 0.81);
        const cdouble a = bethe_hybridization_matsubara(-std::conj(z));
        const cdouble b = std::conj(bethe_hybridization_matsubara(z));
        CHECK(std::abs(a + b) < 1e-12);  // Delta(-conj z) = -conj(Delta(z)) for the PH-symmetric density
        CHECK_THROWS_AS(bethe_hybridization_matsubara(cdouble(0.5, 0)), std::invalid_argument);
    }
}

TEST_CASE("fit_bath") {
    SUBCASE("self-consistency: a 3-pole target is recovered exactly") {
        BathParams ref;
        ref.eps_bath = MatrixXcd::Zero(3, 3);
        ref.V = MatrixXcd::Zero(1, 3);
        const double e[3] = {-0.9, 0.05, 1.1};
        const double v[3] = {0.45, 0.3, 0.55};
        for (int k = 0; k < 3; ++k) {
            ref.eps_bath(k, k) = e[k];
            ref.V(0, k) = v[k];
        }
        HybridizationTarget t;
        t.n_imp = 1;
        t.beta_f = 100;
        t.n_matsubara = 100;
        t.evaluator = [&](cdouble z) { return discrete_hybridization(ref, z); };
        FitResult fit = fit_bath(t, 3, 8, 11);
        CHECK(fit.distance < 1e-10);
        for (int k = 0; k < 3; ++k) {
            CHECK(fit.bath.eps_bath(k, k).real() == doctest::Approx(e[k]).epsilon(1e-4));
            CHECK(std::abs(fit.bath.V(0, k)) == doctest::Approx(v[k]).epsilon(1e-4));
        }
    }
    SUBCASE("n_bath = 0 distance is the target norm") {
        HybridizationTarget t;
        t.n_imp = 1;
        t.beta_f = 50;
        t.n_matsubara = 20;
        t.evaluator = [](cdouble z) {
            return Eigen::MatrixXcd::Constant(1, 1, bethe_hybridization_matsubara(z));
        };
        t.weighting = MatsubaraWeight::Uniform;
        FitResult fit = fit_bath(t, 0, 1, 1);
        double ref = 0;
        for (double w : matsubara_grid(50, 20)) ref += std::norm(bethe_hybridization_matsubara(cdouble(0, w)));
        CHECK(fit.distance == doctest::Approx(ref).epsilon(1e-12));
    }
    SUBCASE("bethe fit with 7 baths reproduces the reference parameters") {
        HybridizationTarget t;
        t.n_imp = 1;
        t.beta_f = 100;
        t.n_matsubara = 100;
        t.evaluator = [](cdouble z) {
            return Eigen::MatrixXcd::Constant(1, 1, bethe_hybridization_matsubara(z));
        };
        FitResult fit = fit_bath(t, 7, 32, 1);
        const double eref[7] = {-1.173, -0.374, -0.090, 0.000, 0.090, 0.374, 1.173};
        const double vref[7] = {0.537, 0.385, 0.220, 0.134, 0.220, 0.385, 0.537};
        for (int k = 0; k < 7; ++k) {
            CHECK(std::abs(fit.bath.eps_bath(k, k).real() - eref[k]) < 5e-2);
            CHECK(std::abs(std::abs(fit.bath.V(0, k)) - vref[k]) < 5e-2);
        }
        // particle-hole symmetry of the fit
        for (int k = 0; k < 7; ++k)
            CHECK(std::abs(fit.bath.eps_bath(k, k).real() + fit.bath.eps_bath(6 - k, 6 - k).real()) <
                  5e-2);
        // fitted hybridization is causal on the upper axis
        for (double w : matsubara_grid(100, 30))
            CHECK(discrete_hybridization(fit.bath, cdouble(0, w))(0, 0).imag() < 0);
    }
    SUBCASE("distance is non-increasing over restarts") {
        HybridizationTarget t;
        t.n_imp = 1;
        t.beta_f = 100;
        t.n_matsubara = 60;
        t.evaluator = [](cdouble z) {
            return Eigen::MatrixXcd::Constant(1, 1, bethe_hybridization_matsubara(z));
        };
        double prev = std::numeric_limits<double>::infinity();
        for (int r : {1, 4, 16}) {
            FitResult fit = fit_bath(t, 5, r, 3);
            CHECK(fit.distance <= prev + 1e-12);
            prev = fit.distance;
        }
    }
}

TEST_CASE("dmft") {
    SUBCASE("noninteracting loop reaches the analytic fixed point") {
        // closed-form noninteracting impurity solver
        ImpuritySolver solver = [](const AimModel& m, const std::vector<double>& wn) {
            BathParams b;
            b.eps_bath = m.eps_bath;
            b.V = m.V;
            std::vector<cdouble> g(wn.size());
            for (size_t n = 0; n < wn.size(); ++n) {
                const cdouble z(0, wn[n]);
                g[n] = 1.0 / (z - m.eps_imp(0, 0) - discrete_hybridization(b, z)(0, 0));
            }
            return g;
        };
        DmftOptions opts;
        opts.u = 0.0;
        opts.n_bath = 7;
        opts.max_iterations = 20;
        opts.fit_restarts = 8;
        DmftResult res = dmft_loop(solver, opts);
        CHECK(res.converged);
        CHECK(res.state.gf_change < 1e-5);
        // against the analytic Bethe GF at U = 0 (Delta = G at the fixed point)
        auto wn = matsubara_grid(opts.beta_f, opts.n_matsubara);
        double dev = 0;
        for (size_t n = 0; n < wn.size(); ++n) {
            const cdouble ref = bethe_hybridization_matsubara(cdouble(0, wn[n]));
            dev = std::max(dev, std::abs(res.state.g_imp[n] - ref));
        }
        CHECK(dev < 5e-3);  // limited by the 7-pole discretization
    }
    SUBCASE("converged state is a fixed point of dmft_step") {
        ImpuritySolver solver = [](const AimModel& m, const std::vector<double>& wn) {
            BathParams b;
            b.eps_bath = m.eps_bath;
            b.V = m.V;
            std::vector<cdouble> g(wn.size());
            for (size_t n = 0; n < wn.size(); ++n) {
                const cdouble z(0, wn[n]);
                g[n] = 1.0 / (z - m.eps_imp(0, 0) - discrete_hybridization(b, z)(0, 0));
            }
            return g;
        };
        DmftOptions opts;
        opts.u = 0.0;
        opts.n_bath = 5;
        opts.max_iterations = 25;
        opts.fit_restarts = 8;
        DmftResult res = dmft_loop(solver, opts);
        REQUIRE(res.converged);
        DmftState again = dmft_step(res.state, solver, opts);
        CHECK(again.gf_change < 1e-5);
    }
}
