#include "spclosure/verify.hpp"

#include <cmath>
#include <sstream>

#include "spclosure/closures.hpp"
#include "spclosure/metrics.hpp"
#include "spclosure/random.hpp"

namespace spclosure {

namespace {

std::vector<double> random_vector(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

}  // namespace

std::vector<VerifyResult> filter_identity_suite(uint64_t seed, int n_cases) {
    Rng rng(seed);
    double worst_wr = 0.0, worst_ip = 0.0, worst_orth = 0.0, worst_mom = 0.0, worst_en = 0.0;
    for (int c = 0; c < n_cases; ++c) {
        const int I = static_cast<int>(rng.uniform_int(1, 25));
        const int J = static_cast<int>(rng.uniform_int(1, 20));
        auto g = make_grid_pair(0.0, rng.uniform(0.5, 10.0), I, J);
        auto fp = make_filter_pair(g);

        auto ab = random_vector(rng, I);
        auto bb = random_vector(rng, I);
        auto u = random_vector(rng, g.N);

        // W R = I on coarse vectors.
        auto wr = apply_filter(fp, reconstruct(fp, ab));
        for (int i = 0; i < I; ++i)
            worst_wr = std::max(worst_wr, std::abs(wr[i] - ab[i]) / std::max(1.0, std::abs(ab[i])));

        // (R a, R b)_omega = (a, b)_Omega.
        double lhs = inner_product(reconstruct(fp, ab), reconstruct(fp, bb), g.omega);
        double rhs = inner_product(ab, bb, g.Omega);
        worst_ip = std::max(worst_ip, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));

        // (R W u, u')_omega = 0.
        auto ru = reconstruct(fp, apply_filter(fp, u));
        auto up = sgs_content(fp, u);
        double orth = inner_product(ru, up, g.omega);
        double scale = std::sqrt(inner_product(u, u, g.omega));
        worst_orth = std::max(worst_orth, std::abs(orth) / std::max(1.0, scale));

        // Momentum invariance.
        std::vector<double> ones_f(g.N, 1.0), ones_c(I, 1.0);
        double pf = inner_product(ones_f, u, g.omega);
        double pc = inner_product(ones_c, apply_filter(fp, u), g.Omega);
        worst_mom = std::max(worst_mom, std::abs(pf - pc) / std::max(1.0, std::abs(pf)));

        // Energy decomposition.
        double eh = 0.5 * inner_product(u, u, g.omega);
        double ebar = 0.5 * inner_product(apply_filter(fp, u), apply_filter(fp, u), g.Omega);
        double esgs = 0.5 * inner_product(up, up, g.omega);
        worst_en = std::max(worst_en, std::abs(eh - ebar - esgs) / std::max(1e-30, eh));
    }
    auto mk = [&](const std::string& name, double worst, double tol) {
        return VerifyResult{name, worst < tol, "max rel err " + fmt(worst)};
    };
    return {mk("filter: W R = I", worst_wr, 1e-12),
            mk("filter: inner-product conservation", worst_ip, 1e-12),
            mk("filter: R ubar orthogonal to u'", worst_orth, 1e-12),
            mk("filter: momentum invariance", worst_mom, 1e-12),
            mk("filter: energy decomposition", worst_en, 1e-12)};
}

std::vector<VerifyResult> sp_conservation_suite(uint64_t seed, int n_cases) {
    Rng rng(seed);
    double worst_skew = 0.0, worst_diss = 0.0, worst_mom = 0.0, worst_law = 0.0;
    for (int c = 0; c < n_cases; ++c) {
        const bool kdv = (c % 2) == 1;
        const int I = static_cast<int>(rng.uniform_int(6, 24));
        const int J = static_cast<int>(rng.uniform_int(2, 8));
        CoarseSetup setup;
        setup.eq = kdv ? Equation::KdV : Equation::Burgers;
        setup.nu = kdv ? 0.0 : 0.01;
        setup.epsilon = 6.0;
        setup.mu = 1.0;
        setup.grid = make_grid_pair(0.0, kdv ? 32.0 : 6.2831853071795864769, I, J);

        CompressionOperator comp;
        comp.J = J;
        comp.t_hat = random_vector(rng, J);
        double nrm = std::sqrt(norm2_sq(comp.t_hat));
        for (double& v : comp.t_hat) v /= nrm;
        comp.t.resize(J);
        for (int j = 0; j < J; ++j) comp.t[j] = comp.t_hat[j] / std::sqrt(double(J));

        SPClosure m = make_sp_closure(setup, 1 + static_cast<int>(rng.uniform_int(0, 1)),
                                      static_cast<int>(rng.uniform_int(4, 12)), 5, kdv ? 2 : 1,
                                      !kdv, comp, seed + 1000 + c);
        auto a = random_vector(rng, 2 * I);
        CoarseContext ctx;  // periodic

        auto audit = sp_energy_audit(m, a, ctx, 0.0);
        const double anorm = std::sqrt(norm2_sq(a));
        const double scale = std::max(1.0, anorm * anorm);
        worst_skew = std::max(worst_skew, std::abs(audit.skew_rate) / scale);
        if (m.dissipative) {
            worst_diss = std::max(worst_diss, audit.diss_rate / scale);  // must stay <= ~0
            double law = std::abs(audit.total_rate -
                                  (audit.resolved_rate - audit.q_norm_sq));
            worst_law = std::max(
                worst_law, law / std::max({1.0, std::abs(audit.total_rate), audit.q_norm_sq}));
        } else {
            double law = std::abs(audit.total_rate - audit.resolved_rate);
            worst_law =
                std::max(worst_law, law / std::max(1.0, std::abs(audit.total_rate)));
        }
        worst_mom =
            std::max(worst_mom, std::abs(sp_momentum_residual(m, a, ctx, 0.0)) /
                                    std::max(1.0, anorm));
    }
    return {VerifyResult{"sp: skew term adds zero energy", worst_skew < 1e-11,
                         "max rel " + fmt(worst_skew)},
            VerifyResult{"sp: dissipative term removes energy", worst_diss <= 1e-12,
                         "max signed rate " + fmt(worst_diss)},
            VerifyResult{"sp: closure momentum is zero", worst_mom < 1e-12,
                         "max scaled residual " + fmt(worst_mom)},
            VerifyResult{"sp: semi-discrete energy law", worst_law < 1e-11,
                         "max rel " + fmt(worst_law)}};
}

std::vector<VerifyResult> dissipation_grid_suite() {
    double worst_l1 = 0.0, max_l2 = -1e300;
    for (int I = 10; I <= 100; I += 10)
        for (int J : {2, 5, 10, 20, 50}) {
            auto eig = dissipation_eigen_check(I, J);
            worst_l1 = std::max(worst_l1, std::abs(eig.lambda1));
            max_l2 = std::max(max_l2, eig.lambda2);
        }
    return {VerifyResult{"dissipation: lambda1 = 0", worst_l1 < 1e-10,
                         "max |lambda1| " + fmt(worst_l1)},
            VerifyResult{"dissipation: lambda2 < 0", max_l2 < 0.0,
                         "max lambda2 " + fmt(max_l2)}};
}

}  // namespace spclosure
