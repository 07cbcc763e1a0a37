#include "aimq/bath.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "aimq/ed.hpp"
#include "aimq/gf.hpp"

namespace aimq {

std::vector<double> matsubara_grid(double beta_f, int n_matsubara) {
    if (beta_f <= 0) throw std::invalid_argument("matsubara_grid: beta_f must be > 0");
    std::vector<double> w(static_cast<size_t>(n_matsubara));
    for (int n = 0; n < n_matsubara; ++n) w[size_t(n)] = (2 * n + 1) * M_PI / beta_f;
    return w;
}

Eigen::MatrixXcd discrete_hybridization(const BathParams& bath, cdouble z) {
    const Eigen::Index nb = bath.eps_bath.rows();
    Eigen::MatrixXcd res = z * Eigen::MatrixXcd::Identity(nb, nb) - bath.eps_bath;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(res);
    if (!lu.isInvertible()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bath.eps_bath);
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            if (std::abs(z - es.eigenvalues()[i]) < 1e-12)
                throw std::runtime_error("discrete_hybridization: z collides with bath eigenvalue " +
                                         std::to_string(es.eigenvalues()[i]));
        }
        throw std::runtime_error("discrete_hybridization: singular resolvent");
    }
    return bath.V * lu.solve(bath.V.adjoint());
}

cdouble bethe_hybridization_matsubara(cdouble z) {
    if (z.imag() == 0.0) throw std::invalid_argument("bethe_hybridization_matsubara: real z");
    // principal square roots give the branch with Delta ~ 1/z at infinity
    const cdouble s = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
    return (z - s) / 2.0;
}

namespace {

// single-channel pole fit: Delta(z) = sum_k v_k^2 / (z - e_k)
struct ChannelFit {
    Eigen::VectorXd eps, v;
    double distance = 0.0;
    bool converged = true;
};

double channel_distance(const Eigen::VectorXd& eps, const Eigen::VectorXd& v,
                        const std::vector<double>& wn, const std::vector<cdouble>& target,
                        const std::vector<double>& wt) {
    double d = 0;
    for (size_t n = 0; n < wn.size(); ++n) {
        cdouble fit = 0;
        for (int k = 0; k < eps.size(); ++k) fit += v[k] * v[k] / (cdouble(0, wn[n]) - eps[k]);
        d += wt[n] * wt[n] * std::norm(fit - target[n]);
    }
    return d;
}

// Levenberg-Marquardt on parameters p = (eps_1..K, v_1..K)
ChannelFit lm_fit(Eigen::VectorXd eps, Eigen::VectorXd v, const std::vector<double>& wn,
                  const std::vector<cdouble>& target, const std::vector<double>& wt,
                  int max_iter = 400) {
    const int K = int(eps.size());
    const int M = int(wn.size());
    double lambda = 1e-3;
    double d = channel_distance(eps, v, wn, target, wt);
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
        Eigen::MatrixXd jac(2 * M, 2 * K);
        Eigen::VectorXd resid(2 * M);
        for (int n = 0; n < M; ++n) {
            const cdouble z(0, wn[size_t(n)]);
            cdouble fit = 0;
            for (int k = 0; k < K; ++k) {
                const cdouble den = z - eps[k];
                fit += v[k] * v[k] / den;
                const cdouble de = v[k] * v[k] / (den * den);
                const cdouble dv = 2.0 * v[k] / den;
                jac(2 * n, k) = wt[size_t(n)] * de.real();
                jac(2 * n + 1, k) = wt[size_t(n)] * de.imag();
                jac(2 * n, K + k) = wt[size_t(n)] * dv.real();
                jac(2 * n + 1, K + k) = wt[size_t(n)] * dv.imag();
            }
            const cdouble r = wt[size_t(n)] * (fit - target[size_t(n)]);
            resid[2 * n] = r.real();
            resid[2 * n + 1] = r.imag();
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * resid;
        if (jtr.norm() < 1e-13) {
            converged = true;
            break;
        }
        bool accepted = false;
        for (int tries = 0; tries < 20; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda * jtj.diagonal().array().max(1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            Eigen::VectorXd e2 = eps + step.head(K);
            Eigen::VectorXd v2 = v + step.tail(K);
            const double d2 = channel_distance(e2, v2, wn, target, wt);
            if (d2 <= d) {
                const double rel = (d - d2) / std::max(d, 1e-300);
                eps = e2;
                v = v2;
                d = d2;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (rel < 1e-13 || step.norm() < 1e-13) converged = true;
                break;
            }
            lambda *= 10;
            if (lambda > 1e12) break;
        }
        if (!accepted) {
            converged = true;  // stalled at a (numerical) stationary point
            break;
        }
    }
    ChannelFit out;
    out.eps = eps;
    out.v = v;
    out.distance = d;
    out.converged = converged;
    return out;
}

ChannelFit fit_channel(const std::vector<double>& wn, const std::vector<cdouble>& target, int K,
                       int restarts, unsigned seed, const std::vector<double>& wt) {
    // scale estimates from the high-frequency tail: Im Delta ~ -m0/w + m2/w^3
    const size_t M = wn.size();
    double m0 = 1.0, width = 1.0;
    if (M >= 2) {
        const double w1 = wn[M - 1], w2 = wn[M / 2];
        const double y1 = -target[M - 1].imag() * w1, y2 = -target[M - 2].imag() * wn[M - 2];
        m0 = std::max(1e-12, (y1 + y2) / 2);
        const double y3 = -target[M / 2].imag() * w2;
        const double m2 = std::max(0.0, (m0 - y3) * w2 * w2);
        width = std::sqrt(m2 / m0 + 0.25);
    }
    ChannelFit best;
    best.distance = std::numeric_limits<double>::infinity();
    const double vscale = std::sqrt(m0 / K);
    for (int r = 0; r < std::max(1, restarts); ++r) {
        Eigen::VectorXd eps(K), v(K);
        if (r == 0) {
            // symmetric deterministic start
            for (int k = 0; k < K; ++k) {
                eps[k] = (K == 1) ? 0.0 : width * 1.5 * (2.0 * k / (K - 1) - 1.0);
                v[k] = vscale;
            }
        } else {
            std::mt19937 rng(seed * 7919u + unsigned(r));
            std::uniform_real_distribution<double> ed(-2.0 * width, 2.0 * width);
            std::uniform_real_distribution<double> vd(0.3, 1.7);
            for (int k = 0; k < K; ++k) {
                eps[k] = ed(rng);
                v[k] = vscale * vd(rng);
            }
        }
        ChannelFit fit = lm_fit(eps, v, wn, target, wt);
        if (fit.distance < best.distance - 1e-15) best = fit;
    }
    // deterministic ordering: poles ascending, couplings non-negative
    std::vector<int> idx(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) idx[size_t(k)] = k;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return best.eps[a] < best.eps[b]; });
    Eigen::VectorXd es(K), vs(K);
    for (int k = 0; k < K; ++k) {
        es[k] = best.eps[idx[size_t(k)]];
        vs[k] = std::abs(best.v[idx[size_t(k)]]);
    }
    best.eps = es;
    best.v = vs;
    return best;
}

}  // namespace

FitResult fit_bath(const HybridizationTarget& target, int n_bath, int restarts, unsigned seed) {
    if (n_bath < 0) throw std::invalid_argument("fit_bath: n_bath must be >= 0");
    const int ni = target.n_imp;
    const auto wn = matsubara_grid(target.beta_f, target.n_matsubara);
    std::vector<double> wt(wn.size(), 1.0);
    if (target.weighting == MatsubaraWeight::InverseOmega) {
        for (size_t n = 0; n < wn.size(); ++n) wt[n] = 1.0 / std::sqrt(wn[n]);
    }
    FitResult out;
    if (n_bath == 0) {
        out.bath.eps_bath = Eigen::MatrixXcd::Zero(0, 0);
        out.bath.V = Eigen::MatrixXcd::Zero(ni, 0);
        double d = 0;
        for (size_t n = 0; n < wn.size(); ++n)
            d += wt[n] * wt[n] * target.evaluator(cdouble(0, wn[n])).squaredNorm();
        out.distance = d;
        return out;
    }
    if (n_bath % ni != 0)
        throw std::invalid_argument("fit_bath: n_bath must be divisible by n_imp");
    const int per = n_bath / ni;
    out.bath.eps_bath = Eigen::MatrixXcd::Zero(n_bath, n_bath);
    out.bath.V = Eigen::MatrixXcd::Zero(ni, n_bath);
    out.distance = 0.0;
    for (int c = 0; c < ni; ++c) {
        std::vector<cdouble> tgt(wn.size());
        for (size_t n = 0; n < wn.size(); ++n) tgt[n] = target.evaluator(cdouble(0, wn[n]))(c, c);
        ChannelFit fit = fit_channel(wn, tgt, per, restarts, seed + unsigned(c) * 101u, wt);
        for (int k = 0; k < per; ++k) {
            out.bath.eps_bath(c * per + k, c * per + k) = fit.eps[k];
            out.bath.V(c, c * per + k) = fit.v[k];
        }
        out.distance += fit.distance;
        out.converged = out.converged && fit.converged;
    }
    return out;
}

AimModel model_from_bath(const BathParams& bath, double u, double eps_imp) {
    AimModel m;
    m.n_imp = int(bath.V.rows());
    m.n_bath = int(bath.eps_bath.rows());
    m.U = u;
    m.J = 0.0;
    m.eps_imp = Eigen::MatrixXcd::Identity(m.n_imp, m.n_imp) * eps_imp;
    m.eps_bath = bath.eps_bath;
    m.V = bath.V;
    return m;
}

ImpuritySolver make_ed_impurity_solver() {
    return [](const AimModel& model, const std::vector<double>& wn) {
        auto [h, split] = build_hamiltonian(model);
        EdResult res = ed_ground_state(h);
        ContinuedFraction gg = ed_green_function(res, h, 0, GfBranch::Greater, 150);
        ContinuedFraction gl = ed_green_function(res, h, 0, GfBranch::Lesser, 150);
        std::vector<cdouble> g(wn.size());
        for (size_t n = 0; n < wn.size(); ++n) g[n] = retarded_gf(gg, gl, cdouble(0, wn[n]));
        return g;
    };
}

DmftState dmft_step(const DmftState& state, const ImpuritySolver& solver, const DmftOptions& opts) {
    const auto wn = matsubara_grid(opts.beta_f, opts.n_matsubara);
    AimModel model = model_from_bath(state.bath, opts.u, -opts.u / 2);
    std::vector<cdouble> g = solver(model, wn);
    double change = 0;
    if (!state.g_imp.empty()) {
        for (size_t n = 0; n < wn.size(); ++n) change = std::max(change, std::abs(g[n] - state.g_imp[n]));
    } else {
        change = std::numeric_limits<double>::infinity();
    }
    // Delta_new = G (gamma = 1 convention), with linear mixing against the
    // previous discretized hybridization
    BathParams prev_bath = state.bath;
    std::vector<cdouble> tgt(wn.size());
    for (size_t n = 0; n < wn.size(); ++n) {
        const cdouble old = discrete_hybridization(prev_bath, cdouble(0, wn[n]))(0, 0);
        tgt[n] = opts.mixing * g[n] + (1.0 - opts.mixing) * old;
    }
    HybridizationTarget target;
    target.n_imp = 1;
    target.beta_f = opts.beta_f;
    target.n_matsubara = opts.n_matsubara;
    target.evaluator = [tgt, wn](cdouble z) {
        // nearest Matsubara sample (the fit only evaluates on the grid)
        size_t bestn = 0;
        double bestd = std::abs(z.imag() - wn[0]);
        for (size_t n = 1; n < wn.size(); ++n) {
            const double d = std::abs(z.imag() - wn[n]);
            if (d < bestd) {
                bestd = d;
                bestn = n;
            }
        }
        return Eigen::MatrixXcd::Constant(1, 1, tgt[bestn]);
    };
    FitResult fit = fit_bath(target, int(state.bath.eps_bath.rows()), opts.fit_restarts,
                             opts.seed + unsigned(state.iteration) * 13u);
    DmftState next;
    next.iteration = state.iteration + 1;
    next.bath = fit.bath;
    next.g_imp = std::move(g);
    next.distance = fit.distance;
    next.gf_change = change;
    return next;
}

DmftResult dmft_loop(const ImpuritySolver& solver, const DmftOptions& opts) {
    HybridizationTarget t0;
    t0.n_imp = 1;
    t0.beta_f = opts.beta_f;
    t0.n_matsubara = opts.n_matsubara;
    t0.evaluator = [](cdouble z) {
        return Eigen::MatrixXcd::Constant(1, 1, bethe_hybridization_matsubara(z));
    };
    FitResult fit0 = fit_bath(t0, opts.n_bath, opts.fit_restarts, opts.seed);
    DmftResult out;
    out.state.bath = fit0.bath;
    out.state.distance = fit0.distance;
    for (int it = 0; it < opts.max_iterations; ++it) {
        DmftState next = dmft_step(out.state, solver, opts);
        out.gf_changes.push_back(next.gf_change);
        const bool had_prev = !out.state.g_imp.empty();
        out.state = std::move(next);
        out.iterations = it + 1;
        if (had_prev && out.state.gf_change < opts.conv_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace aimq
