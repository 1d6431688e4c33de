#include <cmath>

#include "doctest.h"
#include "spclosure/random.hpp"
#include "spclosure/tape.hpp"

using namespace spclosure;

namespace {

// Central finite differences against the tape for a scalar-valued builder.
template <class Builder>
void check_against_fd(ParameterSet& params, Builder&& build, double step = 1e-6,
                      double tol = 1e-5) {
    Tape tape(&params);
    int loss = build(tape);
    std::vector<double> grad;
    tape.backward(loss, grad);
    REQUIRE(grad.size() == params.size());

    for (size_t i = 0; i < params.size(); ++i) {
        const double keep = params.values()[i];
        params.values()[i] = keep + step;
        Tape tp(&params);
        double fp = tp.val(build(tp)).v[0];
        params.values()[i] = keep - step;
        Tape tm(&params);
        double fm = tm.val(build(tm)).v[0];
        params.values()[i] = keep;
        const double fd = (fp - fm) / (2.0 * step);
        const double err = std::abs(grad[i] - fd) / std::max({1.0, std::abs(fd), std::abs(grad[i])});
        CHECK(err < tol);
    }
}

}  // namespace

TEST_CASE("tape: polynomial gradients") {
    ParameterSet params;
    params.add("theta", {1});
    params.values()[0] = 3.0;

    Tape tape(&params);
    // loss = theta^2 via a 1-wide conv (weights as parameters).
    int one = tape.leaf(std::vector<double>{1.0});
    int theta = tape.conv1d(one, 0, -1, 1, 1);
    int loss = tape.sumsq(theta);
    CHECK(tape.val(loss).v[0] == doctest::Approx(9.0));
    std::vector<double> grad;
    tape.backward(loss, grad);
    CHECK(grad[0] == doctest::Approx(6.0).epsilon(1e-13));

    // Constant loss has zero gradient.
    Tape t2(&params);
    int c = t2.leaf(std::vector<double>{5.0});
    int l2 = t2.sumsq(c);
    t2.backward(l2, grad);
    CHECK(grad[0] == 0.0);
}

TEST_CASE("tape: elementwise and structural ops against finite differences") {
    Rng rng(77);
    ParameterSet params;
    params.add("w", {6});
    for (auto& v : params.values()) v = rng.uniform(-1.0, 1.0);

    std::vector<double> data(6);
    for (auto& v : data) v = rng.uniform(-1.0, 1.0);

    check_against_fd(params, [&](Tape& t) {
        int x = t.leaf(data);
        int w = t.conv1d(t.leaf(std::vector<double>(1, 1.0)), 0, -1, 6, 1);  // 6 params as 6 ch
        // Rebuild a 1x6 vector from the 6 channels.
        std::vector<int> parts;
        for (int c = 0; c < 6; ++c) parts.push_back(t.slice_ch(w, c));
        int wv = parts[0];
        for (int c = 1; c < 6; ++c) wv = t.concat_len(wv, parts[c]);
        int prod = t.mul(x, wv);
        int sq = t.square(t.relu(prod));
        int sc = t.scale(sq, 0.37);
        int split_a = t.slice_len(sc, 0, 3);
        int split_b = t.slice_len(sc, 3, 3);
        int joined = t.add(split_a, split_b);
        int padded = t.pad(joined, 2, PadSpec{PadMode::Periodic, 0.0, 0.0});
        return t.sumsq(t.sub(padded, t.scale_vec(padded, std::vector<double>(7, 0.5))));
    });
}

TEST_CASE("tape: conv1d matches a dense im2col oracle and its gradient") {
    Rng rng(5);
    const int ci = 2, co = 3, k = 3, lp = 9;
    ParameterSet params;
    long woff = static_cast<long>(params.add("w", {co, ci, k}));
    long boff = static_cast<long>(params.add("b", {co}));
    for (auto& v : params.values()) v = rng.uniform(-1.0, 1.0);

    Tensor x(ci, lp);
    for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);

    Tape tape(&params);
    int xv = tape.leaf(x);
    int out = tape.conv1d(xv, woff, boff, co, k);
    const Tensor& got = tape.val(out);
    REQUIRE(got.ch == co);
    REQUIRE(got.n == lp - k + 1);

    for (int o = 0; o < co; ++o)
        for (int i = 0; i < got.n; ++i) {
            double ref = params.values()[boff + o];
            for (int c = 0; c < ci; ++c)
                for (int j = 0; j < k; ++j)
                    ref += params.values()[woff + (o * ci + c) * k + j] * x.at(c, i + j);
            CHECK(got.at(o, i) == doctest::Approx(ref).epsilon(1e-12));
        }

    check_against_fd(params, [&](Tape& t) {
        int in = t.leaf(x);
        int conv = t.conv1d(in, woff, boff, co, k);
        return t.sumsq(t.relu(conv));
    });
}

TEST_CASE("tape: stencil and transpose are exact adjoints and differentiable") {
    Rng rng(6);
    const int B = 2, n = 8;
    ParameterSet params;
    long woff = static_cast<long>(params.add("b", {2 * B + 1}));
    for (auto& v : params.values()) v = rng.uniform(-1.0, 1.0);

    std::vector<double> x(n), y(n);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);

    for (bool constrained : {false, true}) {
        for (PadMode mode : {PadMode::Periodic, PadMode::GhostU, PadMode::GhostS}) {
            PadSpec spec{mode, 0.0, -0.7};  // alpha = 0 keeps the map linear
            Tape tape(&params);
            int xv = tape.leaf(x);
            int yv = tape.leaf(y);
            int bx = tape.stencil(xv, woff, B, constrained, spec);
            int bty = tape.stencil_t(yv, woff, B, constrained, spec);
            // <Bx, y> == <x, B^T y>.
            double lhs = dot(tape.val(bx).v, y);
            double rhs = dot(x, tape.val(bty).v);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

            check_against_fd(params, [&](Tape& t) {
                int a = t.stencil(t.leaf(x), woff, B, constrained, spec);
                int b = t.stencil_t(t.leaf(y), woff, B, constrained, spec);
                return t.sumsq(t.add(a, b));
            });
        }
    }

    // Constrained stencil on a constant vector vanishes.
    Tape tape(&params);
    int cv = tape.leaf(std::vector<double>(n, 1.7));
    int out = tape.stencil(cv, woff, B, true, PadSpec{PadMode::Periodic, 0.0, 0.0});
    CHECK(max_abs(tape.val(out).v) < 1e-14);
}

TEST_CASE("tape: convection and fixed stencil gradients; ghost alpha sensitivity") {
    Rng rng(21);
    ParameterSet params;
    long woff = static_cast<long>(params.add("w", {3}));
    for (auto& v : params.values()) v = rng.uniform(-0.5, 0.5);

    std::vector<double> u(7);
    for (auto& v : u) v = rng.uniform(0.2, 1.0);

    check_against_fd(params, [&](Tape& t) {
        // theta enters through a stencil before the nonlinear convection.
        int s = t.stencil(t.leaf(u), woff, 1, false, PadSpec{PadMode::GhostU, 0.3, 0.0});
        int p = t.pad(s, 1, PadSpec{PadMode::GhostU, 0.3, 0.0});
        int c = t.convection(p, 1.0 / 0.3);
        int f = t.fixed_stencil(t.pad(c, 1, PadSpec{PadMode::Periodic, 0.0, 0.0}),
                                {1.0, -2.0, 1.0}, -1, 2.5, 7);
        return t.sumsq(f);
    });
}

TEST_CASE("tape: replay is bit-identical and backward is deterministic") {
    Rng rng(30);
    ParameterSet params;
    long woff = static_cast<long>(params.add("w", {2, 1, 3}));
    long boff = static_cast<long>(params.add("b", {2}));
    for (auto& v : params.values()) v = rng.uniform(-1.0, 1.0);

    std::vector<double> x(10);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);

    Tape tape(&params);
    int xv = tape.leaf(x);
    int padded = tape.pad(xv, 1, PadSpec{PadMode::Periodic, 0.0, 0.0});
    int conv = tape.conv1d(padded, woff, boff, 2, 3);
    int loss = tape.sumsq(tape.relu(conv));

    std::vector<double> before;
    for (size_t i = 0; i < tape.n_nodes(); ++i)
        for (double v : tape.val(static_cast<int>(i)).v) before.push_back(v);
    tape.replay();
    std::vector<double> after;
    for (size_t i = 0; i < tape.n_nodes(); ++i)
        for (double v : tape.val(static_cast<int>(i)).v) after.push_back(v);
    CHECK(before == after);

    std::vector<double> g1, g2;
    tape.backward(loss, g1);
    tape.backward(loss, g2);
    CHECK(g1 == g2);
}

TEST_CASE("tape: non-finite intermediates name the primitive") {
    ParameterSet params;
    Tape tape(&params);
    int big = tape.leaf(std::vector<double>{1e308});
    CHECK_THROWS_WITH_AS(tape.square(big),
                         doctest::Contains("square"), std::runtime_error);
}
