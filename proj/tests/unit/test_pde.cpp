#include <cmath>

#include "doctest.h"
#include "spclosure/pde.hpp"
#include "spclosure/random.hpp"
#include "spclosure/tensor.hpp"

using namespace spclosure;

namespace {

std::vector<double> random_vec(Rng& rng, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// Dense circulant from an offset->weight map, oracle only.
std::vector<double> circulant(int n, const std::vector<std::pair<int, double>>& taps) {
    std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r)
        for (auto [off, w] : taps) m[static_cast<size_t>(r) * n + ((r + off) % n + n) % n] += w;
    return m;
}

}  // namespace

TEST_CASE("pde: convection stencil") {
    BCSpec bc = BCSpec::periodic();
    std::vector<double> c(8, 1.3);
    auto rhs = convection_rhs(c, 0.5, bc, 0.0);
    CHECK(max_abs(rhs) == 0.0);

    // Unique 3-point skew-symmetric split consistent with -(1/2) d(u^2)/dx:
    // coefficients 1/(6h) on both the conservative and advective parts.
    auto r = convection_rhs({1.0, 2.0, 3.0}, 1.0, bc, 0.0);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(r[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sum(r) == doctest::Approx(0.0).epsilon(1e-14));

    // Quadratic consistency: for u = sin(x), C(u)u -> -(1/2) d(u^2)/dx
    // = -sin(x)cos(x) as the grid refines.
    for (int n : {64, 128}) {
        const double h = 2.0 * M_PI / n;
        std::vector<double> u(n), ref(n);
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * h;
            u[i] = std::sin(x);
            ref[i] = -std::sin(x) * std::cos(x);
        }
        auto cu = convection_rhs(u, h, bc, 0.0);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(cu[i] - ref[i]));
        CHECK(err < 2.0 * h * h);  // second order
    }

    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        auto u = random_vec(rng, 64);
        auto cu = convection_rhs(u, 0.1, bc, 0.0);
        double unorm = std::sqrt(norm2_sq(u));
        CHECK(std::abs(dot(u, cu)) < 1e-12 * unorm * unorm * unorm / 0.1);
        CHECK(std::abs(sum(cu)) < 1e-11);
    }
}

TEST_CASE("pde: diffusion stencil") {
    BCSpec bc = BCSpec::periodic();
    std::vector<double> c(6, 2.0);
    CHECK(max_abs(diffusion_rhs(c, 1.0, 1.0, bc, 0.0)) == 0.0);

    auto r = diffusion_rhs({0.0, 1.0, 0.0}, 1.0, 1.0, bc, 0.0);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(-2.0));
    CHECK(r[2] == doctest::Approx(1.0));

    CHECK_THROWS(diffusion_rhs(c, -0.5, 1.0, bc, 0.0));

    // u^T (nu D u) h = -h nu ||Q u||^2 with Q the forward difference.
    Rng rng(7);
    const double h = 0.05, nu = 0.3;
    auto u = random_vec(rng, 40);
    auto d = diffusion_rhs(u, nu, h, bc, 0.0);
    double qnorm = 0.0;
    for (int i = 0; i < 40; ++i) {
        double q = (u[(i + 1) % 40] - u[i]) / h;
        qnorm += q * q;
    }
    CHECK(h * dot(u, d) == doctest::Approx(-h * nu * qnorm).epsilon(1e-12));

    // Per-cell viscosity path agrees with the constant path.
    auto d2 = diffusion_rhs(u, std::vector<double>(40, nu), h, bc, 0.0);
    for (int i = 0; i < 40; ++i) CHECK(d2[i] == doctest::Approx(d[i]).epsilon(1e-14));
}

TEST_CASE("pde: kdv dispersion matches the dense skew circulant") {
    BCSpec bc = BCSpec::periodic();
    std::vector<double> c(8, 0.4);
    CHECK(max_abs(kdv_dispersion_rhs(c, 1.0, 1.0, bc)) == 0.0);

    const int n = 12;
    const double mu = 0.7, h = 0.3;
    const double s = -mu / (2.0 * h * h * h);
    auto D = circulant(n, {{-2, -s}, {-1, 2 * s}, {1, -2 * s}, {2, s}});
    // Skew check of the dense operator itself.
    for (int r = 0; r < n; ++r)
        for (int col = 0; col < n; ++col)
            CHECK(D[static_cast<size_t>(r) * n + col] ==
                  doctest::Approx(-D[static_cast<size_t>(col) * n + r]).epsilon(1e-15));

    Rng rng(23);
    auto u = random_vec(rng, n);
    auto fast = kdv_dispersion_rhs(u, mu, h, bc);
    for (int i = 0; i < n; ++i) {
        double ref = 0.0;
        for (int j = 0; j < n; ++j) ref += D[static_cast<size_t>(i) * n + j] * u[j];
        CHECK(fast[i] == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(std::abs(dot(u, fast)) < 1e-12 * norm2_sq(u) / (h * h * h));

    BCSpec io = BCSpec::inflow_outflow([](double) { return 0.0; });
    CHECK_THROWS(kdv_dispersion_rhs(u, mu, h, io));
}

TEST_CASE("pde: full rhs conservation audits") {
    Rng rng(31);
    BCSpec bc = BCSpec::periodic();

    PDEConfig inviscid;
    inviscid.kind = Equation::Burgers;
    inviscid.nu = 0.0;
    auto u = random_vec(rng, 50);
    auto r = full_rhs(inviscid, u, 0.1, bc, 0.0);
    CHECK(std::abs(dot(u, r)) < 1e-12 * std::max(1.0, norm2_sq(u)) / 0.1);

    PDEConfig kdv;
    kdv.kind = Equation::KdV;
    kdv.epsilon = 6.0;
    kdv.mu = 1.0;
    auto rk = full_rhs(kdv, u, 0.1, bc, 0.0);
    CHECK(std::abs(sum(rk) * 0.1) < 1e-11);

    PDEConfig viscous;
    viscous.kind = Equation::Burgers;
    viscous.nu = 0.01;
    auto rv = full_rhs(viscous, u, 0.1, bc, 0.0);
    CHECK(dot(u, rv) * 0.1 <= 1e-12);
}

TEST_CASE("pde: rk4") {
    auto zero = [](const std::vector<double>& u, double) {
        return std::vector<double>(u.size(), 0.0);
    };
    auto s = rk4_step(zero, {1.0, -2.0}, 0.0, 0.1);
    CHECK(s == std::vector<double>{1.0, -2.0});

    auto decay = [](const std::vector<double>& u, double) {
        return std::vector<double>{-u[0]};
    };
    auto d = rk4_step(decay, {1.0}, 0.0, 0.1);
    CHECK(d[0] == doctest::Approx(0.90483750).epsilon(1e-9));

    // Linear rhs A u matches the degree-4 polynomial of A dt applied to u.
    const double a11 = 0.3, a12 = -0.2, a21 = 0.5, a22 = -0.1, dt = 0.05;
    auto lin = [&](const std::vector<double>& u, double) {
        return std::vector<double>{a11 * u[0] + a12 * u[1], a21 * u[0] + a22 * u[1]};
    };
    std::vector<double> u0{0.7, -1.1};
    auto got = rk4_step(lin, u0, 0.0, dt);
    // Phi = I + M + M^2/2 + M^3/6 + M^4/24 with M = A dt.
    double M[4] = {a11 * dt, a12 * dt, a21 * dt, a22 * dt};
    double P[4] = {1.0, 0.0, 0.0, 1.0};
    double term[4] = {1.0, 0.0, 0.0, 1.0};
    for (int k = 1; k <= 4; ++k) {
        double nt[4] = {
            (term[0] * M[0] + term[1] * M[2]) / k, (term[0] * M[1] + term[1] * M[3]) / k,
            (term[2] * M[0] + term[3] * M[2]) / k, (term[2] * M[1] + term[3] * M[3]) / k};
        for (int i = 0; i < 4; ++i) {
            term[i] = nt[i];
            P[i] += nt[i];
        }
    }
    CHECK(got[0] == doctest::Approx(P[0] * u0[0] + P[1] * u0[1]).epsilon(1e-13));
    CHECK(got[1] == doctest::Approx(P[2] * u0[0] + P[3] * u0[1]).epsilon(1e-13));
}

TEST_CASE("pde: simulate saves, conserves, and flags divergence") {
    auto zero = [](const std::vector<double>& u, double) {
        return std::vector<double>(u.size(), 0.0);
    };
    auto traj = simulate_generic(zero, {0.5, 0.25}, 0.1, 0.1, 0.1);
    REQUIRE(traj.states.size() == 2);
    CHECK(traj.states[0] == traj.states[1]);

    // KdV at desk scale: relative energy drift below 1e-6 over T=1.
    PDEConfig kdv;
    kdv.kind = Equation::KdV;
    kdv.epsilon = 6.0;
    kdv.mu = 1.0;
    const int n = 120;
    const double h = 32.0 / n;
    std::vector<double> u0(n);
    for (int i = 0; i < n; ++i) u0[i] = 0.6 * std::sin(2.0 * M_PI * (i + 0.5) / n);
    auto run = simulate(kdv, BCSpec::periodic(), u0, h, 1e-3, 1.0, 0.1);
    REQUIRE(run.stable);
    double e0 = norm2_sq(run.states.front()) * 0.5 * h;
    for (const auto& s : run.states) {
        double e = norm2_sq(s) * 0.5 * h;
        CHECK(std::abs(e - e0) / e0 < 1e-6);
    }

    // Viscous Burgers: discrete energy non-increasing at every saved step.
    PDEConfig burgers;
    burgers.kind = Equation::Burgers;
    burgers.nu = 0.01;
    const int nb = 128;
    const double hb = 2.0 * M_PI / nb;
    std::vector<double> ub(nb);
    for (int i = 0; i < nb; ++i) ub[i] = 2.0 + std::sin((i + 0.5) * hb);
    auto runb = simulate(burgers, BCSpec::periodic(), ub, hb, 2.5e-3, 2.0, 0.05);
    REQUIRE(runb.stable);
    double prev = 1e300;
    for (const auto& s : runb.states) {
        double e = norm2_sq(s) * 0.5 * hb;
        CHECK(e <= prev * (1.0 + 1e-13));
        prev = e;
    }

    // Divergence is flagged with the blow-up time; partial results kept.
    auto blow = [](const std::vector<double>& u, double) {
        return std::vector<double>{u[0] * u[0] * 1e4};
    };
    auto bad = simulate_generic(blow, {10.0}, 0.5, 10.0, 0.5);
    CHECK(!bad.stable);
    CHECK(bad.blowup_time > 0.0);
}
