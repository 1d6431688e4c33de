#include <cmath>

#include "doctest.h"
#include "spclosure/compression.hpp"
#include "spclosure/linalg.hpp"
#include "spclosure/random.hpp"

using namespace spclosure;

namespace {

std::vector<double> random_vec(Rng& rng, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST_CASE("compression: rank-one snapshots recover the direction exactly") {
    auto g = make_grid_pair(0.0, 1.0, 4, 3);
    auto fp = make_filter_pair(g);
    // Build snapshots whose per-cell SGS content is proportional to v.
    std::vector<double> v{1.0, 0.0, -1.0};  // zero-mean within a cell
    std::vector<std::vector<double>> snaps;
    Rng rng(2);
    for (int s = 0; s < 5; ++s) {
        std::vector<double> u(g.N);
        for (int i = 0; i < g.I; ++i) {
            double base = rng.uniform(-2.0, 2.0), amp = rng.uniform(0.1, 2.0);
            for (int j = 0; j < g.J; ++j) u[i * g.J + j] = base + amp * v[j];
        }
        snaps.push_back(u);
    }
    auto comp = fit_compression(snaps, fp);
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(comp.t_hat[0] - inv) < 1e-12);
    CHECK(std::abs(comp.t_hat[1]) < 1e-12);
    CHECK(std::abs(comp.t_hat[2] + inv) < 1e-12);
    CHECK(std::sqrt(norm2_sq(comp.t_hat)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(compression_loss(comp, snaps, fp) < 1e-14);
}

TEST_CASE("compression: eigendecomposition oracle on random snapshots") {
    auto g = make_grid_pair(0.0, 2.0, 5, 3);
    auto fp = make_filter_pair(g);
    Rng rng(12);
    std::vector<std::vector<double>> snaps;
    for (int s = 0; s < 4; ++s) snaps.push_back(random_vec(rng, g.N));

    auto comp = fit_compression(snaps, fp);

    // Dense Gram oracle.
    const int J = g.J;
    std::vector<double> gram(J * J, 0.0);
    for (const auto& u : snaps) {
        auto up = sgs_content(fp, u);
        for (int i = 0; i < g.I; ++i)
            for (int a = 0; a < J; ++a)
                for (int b = 0; b < J; ++b)
                    gram[a * J + b] += up[i * J + a] * up[i * J + b];
    }
    auto eig = jacobi_eigensymm(gram, J, true);
    std::vector<double> lead(J);
    for (int a = 0; a < J; ++a) lead[a] = eig.vectors[a * J + (J - 1)];
    // Align signs before comparing.
    double s = dot(lead, comp.t_hat) >= 0 ? 1.0 : -1.0;
    for (int a = 0; a < J; ++a)
        CHECK(comp.t_hat[a] == doctest::Approx(s * lead[a]).epsilon(1e-10));

    // Loss equals the brute-force double loop.
    double brute = 0.0;
    for (const auto& u : snaps) {
        auto up = sgs_content(fp, u);
        for (int i = 0; i < g.I; ++i) {
            double mu2 = 0.0, tmu = 0.0;
            for (int a = 0; a < J; ++a) {
                mu2 += up[i * J + a] * up[i * J + a];
                tmu += comp.t[a] * up[i * J + a];
            }
            brute += std::abs(mu2 / J - tmu * tmu);
        }
    }
    brute /= snaps.size() * g.I;
    CHECK(compression_loss(comp, snaps, fp) == doctest::Approx(brute).epsilon(1e-13));

    // Zero-compression loss: t = 0 gives the plain SGS energy mean.
    CompressionOperator zero;
    zero.J = J;
    zero.t.assign(J, 0.0);
    zero.t_hat.assign(J, 0.0);
    double ref = 0.0;
    for (const auto& u : snaps) {
        auto up = sgs_content(fp, u);
        ref += norm2_sq(up) / J;
    }
    ref /= snaps.size() * g.I;
    CHECK(compression_loss(zero, snaps, fp) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("compression: degenerate input errors") {
    auto g = make_grid_pair(0.0, 1.0, 3, 2);
    auto fp = make_filter_pair(g);
    // Piecewise-constant snapshots carry zero SGS content.
    std::vector<std::vector<double>> snaps{{1, 1, 2, 2, 3, 3}};
    CHECK_THROWS(fit_compression(snaps, fp));
    CHECK_THROWS(fit_compression({}, fp));
}

TEST_CASE("compression: to_state and linearity") {
    auto g = make_grid_pair(0.0, 1.0, 1, 2);
    auto fp = make_filter_pair(g);
    StateTransform st;
    st.fp = fp;
    st.comp.J = 2;
    st.comp.t_hat = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    st.comp.t = {0.5, -0.5};

    auto a = to_state(st, {1.0, 2.0});
    CHECK(a[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(-0.5).epsilon(1e-15));

    // u = R ubar has s = 0.
    auto a0 = to_state(st, {2.5, 2.5});
    CHECK(a0[1] == doctest::Approx(0.0));

    // Linearity and dense oracle on a bigger transform.
    auto g2 = make_grid_pair(0.0, 3.0, 4, 5);
    Rng rng(8);
    std::vector<std::vector<double>> snaps;
    for (int s = 0; s < 3; ++s) snaps.push_back(random_vec(rng, g2.N));
    StateTransform st2;
    st2.fp = make_filter_pair(g2);
    st2.comp = fit_compression(snaps, st2.fp);

    auto u = random_vec(rng, g2.N);
    auto v = random_vec(rng, g2.N);
    auto au = to_state(st2, u), av = to_state(st2, v);
    std::vector<double> upv(g2.N);
    for (int i = 0; i < g2.N; ++i) upv[i] = u[i] + v[i];
    auto asum = to_state(st2, upv);
    for (int i = 0; i < 2 * g2.I; ++i)
        CHECK(asum[i] == doctest::Approx(au[i] + av[i]).epsilon(1e-13));

    auto T = dense_transform_matrix(st2);
    for (int r = 0; r < 2 * g2.I; ++r) {
        double ref = 0.0;
        for (int c = 0; c < g2.N; ++c) ref += T[static_cast<size_t>(r) * g2.N + c] * u[c];
        CHECK(au[r] == doctest::Approx(ref).epsilon(1e-12));
    }

    // transform_rhs is the same linear operator.
    auto tr = transform_rhs(st2, u);
    for (int i = 0; i < 2 * g2.I; ++i) CHECK(tr[i] == au[i]);

    // Compression cannot create energy: 1/2||s||^2_Omega <= 1/2||u'||^2_omega.
    auto up = sgs_content(st2.fp, u);
    double es = 0.0;
    for (int i = 0; i < g2.I; ++i) es += g2.H * au[g2.I + i] * au[g2.I + i];
    double eu = inner_product(up, up, g2.omega);
    CHECK(0.5 * es <= 0.5 * eu * (1.0 + 1e-12));
}
