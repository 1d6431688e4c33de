#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "spclosure/checkpoint.hpp"
#include "spclosure/closures.hpp"
#include "spclosure/random.hpp"

using namespace spclosure;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

CompressionOperator random_compression(Rng& rng, int J) {
    CompressionOperator comp;
    comp.J = J;
    comp.t_hat = random_vec(rng, J);
    double nrm = std::sqrt(norm2_sq(comp.t_hat));
    for (double& v : comp.t_hat) v /= nrm;
    comp.t.resize(J);
    for (int j = 0; j < J; ++j) comp.t[j] = comp.t_hat[j] / std::sqrt(static_cast<double>(J));
    return comp;
}

CoarseSetup burgers_setup(int I, int J) {
    CoarseSetup s;
    s.eq = Equation::Burgers;
    s.nu = 0.01;
    s.grid = make_grid_pair(0.0, 2.0 * M_PI, I, J);
    return s;
}

CoarseSetup kdv_setup(int I, int J) {
    CoarseSetup s;
    s.eq = Equation::KdV;
    s.nu = 0.0;
    s.epsilon = 6.0;
    s.mu = 1.0;
    s.grid = make_grid_pair(0.0, 32.0, I, J);
    return s;
}

}  // namespace

TEST_CASE("closures: constrained stencil apply") {
    PadSpec per{PadMode::Periodic, 0.0, 0.0};
    // b = [1,2,3] constrained -> bbar = [-1,0,1].
    auto out = constrained_stencil_apply({1.0, 2.0, 3.0}, {1.0, 0.0, 0.0, 0.0}, true, per);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(-1.0));
    CHECK(out[3] == doctest::Approx(1.0));

    std::vector<double> c(6, 2.2);
    auto z = constrained_stencil_apply({0.3, -1.0, 0.5}, c, true, per);
    CHECK(max_abs(z) < 1e-14);

    CHECK_THROWS(constrained_stencil_apply({1.0, 2.0}, c, true, per));

    // Dense circulant oracle for the unconstrained case.
    Rng rng(4);
    auto b = random_vec(rng, 5);
    auto f = random_vec(rng, 9);
    auto got = constrained_stencil_apply(b, f, false, per);
    for (int i = 0; i < 9; ++i) {
        double ref = 0.0;
        for (int j = -2; j <= 2; ++j) ref += b[j + 2] * f[((i + j) % 9 + 9) % 9];
        CHECK(got[i] == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("closures: parameter totals match the reported architectures") {
    Rng rng(1);
    // Burgers SP: 3 -> 20 -> 20 -> 4 kernel 5, B = 1 => 2780.
    auto sp_b = make_sp_closure(burgers_setup(10, 4), 2, 20, 5, 1, true,
                                random_compression(rng, 4), 0);
    CHECK(sp_b.params.size() == 2780);
    // KdV SP: 3 -> 30 -> 30 -> 2 kernel 5, B = 2, no dissipation => 5352.
    auto sp_k = make_sp_closure(kdv_setup(10, 4), 2, 30, 5, 2, false,
                                random_compression(rng, 4), 0);
    CHECK(sp_k.params.size() == 5352);
    // Vanilla: 2 -> 20 -> 20 -> 1 kernel 7 => 3261.
    auto van = make_vanilla_closure(burgers_setup(10, 4), 2, 20, 7, 0);
    CHECK(van.params.size() == 3261);
}

TEST_CASE("closures: sp with zero CNN output and stencils reduces to [f_H; 0]") {
    Rng rng(14);
    auto setup = burgers_setup(12, 4);
    auto m = make_sp_closure(setup, 1, 6, 5, 1, true, random_compression(rng, 4), 9);
    for (auto& v : m.params.values()) v = 0.0;

    auto a = random_vec(rng, 24);
    CoarseContext ctx;
    auto rhs = sp_rhs(m, a, ctx, 0.0);

    NoClosure nc{setup};
    std::vector<double> ubar(a.begin(), a.begin() + 12);
    auto fh = no_closure_rhs(nc, ubar, ctx, 0.0);
    for (int i = 0; i < 12; ++i) CHECK(rhs[i] == doctest::Approx(fh[i]).epsilon(1e-14));
    for (int i = 12; i < 24; ++i) CHECK(rhs[i] == 0.0);
}

TEST_CASE("closures: structure audits over random parameters") {
    Rng rng(100);
    for (int trial = 0; trial < 25; ++trial) {
        const bool kdv = trial % 2 == 1;
        const int I = 8 + 2 * (trial % 5);
        auto setup = kdv ? kdv_setup(I, 4) : burgers_setup(I, 4);
        auto m = make_sp_closure(setup, 1 + trial % 2, 4 + trial % 8, 5, kdv ? 2 : 1, !kdv,
                                 random_compression(rng, 4), 200 + trial);
        auto a = random_vec(rng, 2 * I);
        CoarseContext ctx;

        auto audit = sp_energy_audit(m, a, ctx, 0.0);
        const double scale = std::max(1.0, norm2_sq(a));
        CHECK(std::abs(audit.skew_rate) < 1e-11 * scale);
        if (m.dissipative) {
            CHECK(audit.diss_rate <= 1e-12 * scale);
            CHECK(audit.diss_rate == doctest::Approx(-audit.q_norm_sq).epsilon(1e-11));
        }
        // Semi-discrete energy law.
        double expect = audit.resolved_rate - audit.q_norm_sq;
        CHECK(audit.total_rate ==
              doctest::Approx(expect).epsilon(1e-11).scale(std::max(1.0, std::abs(expect))));

        // Momentum residual.
        CHECK(std::abs(sp_momentum_residual(m, a, ctx, 0.0)) <
              1e-12 * std::max(1.0, std::sqrt(norm2_sq(a))));
    }
}

TEST_CASE("closures: unconstrained stencils break momentum (negative control)") {
    Rng rng(61);
    auto setup = burgers_setup(10, 4);
    auto m = make_sp_closure(setup, 1, 6, 5, 1, true, random_compression(rng, 4), 77);
    // Re-mark the constrained blocks as raw by adding a mean offset through
    // direct parameter surgery: shift B2.11 weights by a constant.
    auto a = random_vec(rng, 20);
    CoarseContext ctx;
    double res_ok = std::abs(sp_momentum_residual(m, a, ctx, 0.0));
    CHECK(res_ok < 1e-12 * std::max(1.0, std::sqrt(norm2_sq(a))));

    // Bypass the projection: apply raw stencils through the public op and
    // verify a generic raw stencil fails the zero-sum property.
    auto b = random_vec(rng, 3);
    std::vector<double> ones(10, 1.0);
    auto raw = constrained_stencil_apply(b, ones, false, PadSpec{PadMode::Periodic, 0.0, 0.0});
    CHECK(std::abs(sum(raw)) > 1e-6);  // generically nonzero
    auto con = constrained_stencil_apply(b, ones, true, PadSpec{PadMode::Periodic, 0.0, 0.0});
    CHECK(std::abs(sum(con)) < 1e-13);
}

TEST_CASE("closures: translation equivariance of rhs under periodic shift") {
    Rng rng(71);
    auto setup = kdv_setup(12, 4);
    auto m = make_sp_closure(setup, 2, 8, 5, 2, false, random_compression(rng, 4), 5);
    auto a = random_vec(rng, 24);
    CoarseContext ctx;

    auto rhs = sp_rhs(m, a, ctx, 0.0);
    const int I = 12;
    std::vector<double> shifted(24);
    for (int i = 0; i < I; ++i) {
        shifted[i] = a[(i + 1) % I];
        shifted[I + i] = a[I + (i + 1) % I];
    }
    auto rhs_s = sp_rhs(m, shifted, ctx, 0.0);
    for (int i = 0; i < I; ++i) {
        CHECK(rhs_s[i] == rhs[(i + 1) % I]);
        CHECK(rhs_s[I + i] == rhs[I + (i + 1) % I]);
    }
}

TEST_CASE("closures: vanilla cnn closure conserves momentum") {
    Rng rng(81);
    auto setup = burgers_setup(16, 4);
    auto m = make_vanilla_closure(setup, 2, 6, 7, 3);
    auto u = random_vec(rng, 16);
    CoarseContext ctx;

    auto rhs = vanilla_cnn_rhs(m, u, ctx, 0.0);
    NoClosure nc{setup};
    auto fh = no_closure_rhs(nc, u, ctx, 0.0);
    double closure_mom = 0.0;
    for (int i = 0; i < 16; ++i) closure_mom += setup.grid.H * (rhs[i] - fh[i]);
    CHECK(std::abs(closure_mom) < 1e-12);

    // Zero CNN reduces to f_H.
    for (auto& v : m.params.values()) v = 0.0;
    auto rhs0 = vanilla_cnn_rhs(m, u, ctx, 0.0);
    for (int i = 0; i < 16; ++i) CHECK(rhs0[i] == doctest::Approx(fh[i]).epsilon(1e-14));
}

TEST_CASE("closures: smagorinsky") {
    auto setup = burgers_setup(14, 4);
    SmagorinskyClosure sm{setup, 0.17};
    CoarseContext ctx;

    std::vector<double> c(14, 1.1);
    auto rhs = smagorinsky_rhs(sm, c, ctx, 0.0);
    NoClosure nc{setup};
    auto fh = no_closure_rhs(nc, c, ctx, 0.0);
    for (int i = 0; i < 14; ++i) CHECK(rhs[i] == doctest::Approx(fh[i]).epsilon(1e-14));

    Rng rng(91);
    auto u = random_vec(rng, 14);
    auto r = smagorinsky_rhs(sm, u, ctx, 0.0);
    auto f = no_closure_rhs(nc, u, ctx, 0.0);
    double diss = 0.0;
    for (int i = 0; i < 14; ++i) diss += setup.grid.H * u[i] * (r[i] - f[i]);
    CHECK(diss <= 1e-12);

    // C_s = 0 is the no-closure model.
    SmagorinskyClosure sm0{setup, 0.0};
    auto r0 = smagorinsky_rhs(sm0, u, ctx, 0.0);
    for (int i = 0; i < 14; ++i) CHECK(r0[i] == doctest::Approx(f[i]).epsilon(1e-14));
}

TEST_CASE("closures: fully discrete SP Burgers energy is non-increasing for random theta") {
    Rng rng(121);
    auto setup = burgers_setup(16, 4);
    auto m = make_sp_closure(setup, 2, 8, 5, 1, true, random_compression(rng, 4), 500);
    AnyClosure any = m;
    CoarseContext ctx;

    auto a0 = random_vec(rng, 32, -1.0, 1.0);
    auto traj = simulate_closure(any, ctx, a0, 0.01, 2.0, 0.05);
    REQUIRE(traj.stable);
    std::vector<double> mass2(32, setup.grid.H);
    double prev = 1e300;
    for (const auto& s : traj.states) {
        double es = 0.5 * inner_product(s, s, mass2);
        CHECK(es <= prev * (1.0 + 1e-12));
        prev = es;
    }
    // Momentum of the resolved half is pinned for any theta.
    std::vector<double> mass_u(16, setup.grid.H), ones(16, 1.0);
    std::vector<double> u_first(traj.states.front().begin(), traj.states.front().begin() + 16);
    std::vector<double> u_last(traj.states.back().begin(), traj.states.back().begin() + 16);
    CHECK(inner_product(ones, u_last, mass_u) ==
          doctest::Approx(inner_product(ones, u_first, mass_u)).epsilon(1e-12));
}

TEST_CASE("closures: no-closure KdV run conserves coarse momentum and energy") {
    auto setup = kdv_setup(30, 20);
    AnyClosure nc = NoClosure{setup};
    CoarseContext ctx;
    std::vector<double> u0(30);
    for (int i = 0; i < 30; ++i) {
        const double x = setup.grid.coarse_center(i);
        u0[i] = 0.6 * std::sin(2.0 * M_PI * x / 32.0) + 0.3 * std::cos(4.0 * M_PI * x / 32.0);
    }
    auto traj = simulate_closure(nc, ctx, u0, 5e-3, 2.0, 0.1);
    REQUIRE(traj.stable);
    const double H = setup.grid.H;
    double e0 = 0.5 * H * norm2_sq(traj.states[0]);
    double p0 = H * sum(traj.states[0]);
    for (const auto& s : traj.states) {
        CHECK(std::abs(0.5 * H * norm2_sq(s) - e0) < 1e-8 * e0);  // RK4 drift only
        CHECK(std::abs(H * sum(s) - p0) < 1e-12 * std::max(1.0, std::abs(p0)));
    }
}

TEST_CASE("closures: checkpoint round trip preserves the rhs; mismatches refuse") {
    Rng rng(111);
    auto setup = kdv_setup(10, 6);
    auto m = make_sp_closure(setup, 2, 8, 5, 2, false, random_compression(rng, 6), 19);
    auto a = random_vec(rng, 20);
    CoarseContext ctx;
    auto before = sp_rhs(m, a, ctx, 0.0);

    const std::string path = "test_checkpoint_sp.spnc";
    save_checkpoint(path, m);
    auto loaded = load_checkpoint(path);
    REQUIRE(std::holds_alternative<SPClosure>(loaded));
    auto after = sp_rhs(std::get<SPClosure>(loaded), a, ctx, 0.0);
    CHECK(before == after);

    CheckpointExpect wrong;
    wrong.I = 99;
    CHECK_THROWS(load_checkpoint(path, wrong));
    CheckpointExpect wrong_eq;
    wrong_eq.eq = Equation::Burgers;
    CHECK_THROWS(load_checkpoint(path, wrong_eq));
    std::remove(path.c_str());
}
