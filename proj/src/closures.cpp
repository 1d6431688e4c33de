#include "spclosure/closures.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "spclosure/kernels.hpp"

namespace spclosure {

namespace {

// Block order 11, 12, 21, 22; the first-column blocks (11, 21) are zero-sum
// so the closure adds no momentum.
constexpr const char* kBlockNames[4] = {"11", "12", "21", "22"};

// f_H evaluated on an extended region: input ubar padded so that the valid
// stencils emit I + 2*extra values (cells 1-extra .. I+extra).
int fh_extended_taped(Tape& t, const CoarseSetup& s, int ubar, const CoarseContext& ctx,
                      double time, int extra) {
    const double H = s.grid.H;
    const int I = s.grid.I;
    const int n_out = I + 2 * extra;
    if (s.eq == Equation::Burgers) {
        int up = t.pad(ubar, extra + 1, ctx.pad_u(time));
        int conv = t.convection(up, 1.0 / (6.0 * H));
        if (s.nu != 0.0) {
            int diff = t.fixed_stencil(up, {1.0, -2.0, 1.0}, -1, s.nu / (H * H), n_out);
            return t.add(conv, diff);
        }
        return conv;
    }
    require(ctx.periodic, "fh_extended: KdV supports periodic BCs only");
    int up1 = t.pad(ubar, extra + 1, ctx.pad_u(time));
    int conv = t.scale(t.convection(up1, 1.0 / (6.0 * H)), s.epsilon);
    int up2 = t.pad(ubar, extra + 2, ctx.pad_u(time));
    int disp = t.fixed_stencil(up2, {-1.0, 2.0, 0.0, -2.0, 1.0}, -2, -s.mu / (2.0 * H * H * H),
                               n_out);
    return t.add(conv, disp);
}

// Apply the 2x2 block stencil operator: [B11 x + B12 y; B21 x + B22 y].
std::array<int, 2> block_apply(Tape& t, const SPClosure& m, int op, int x, int y,
                               const PadSpec& pu, const PadSpec& ps) {
    const auto& off = m.b_off[op];
    int out_u = t.add(t.stencil(x, off[0], m.B, true, pu), t.stencil(y, off[1], m.B, false, ps));
    int out_s = t.add(t.stencil(x, off[2], m.B, true, pu), t.stencil(y, off[3], m.B, false, ps));
    return {out_u, out_s};
}

// Exact transpose: [B11^T z_u + B21^T z_s; B12^T z_u + B22^T z_s]; the fold
// uses the pad rule of the original input space.
std::array<int, 2> block_apply_t(Tape& t, const SPClosure& m, int op, int zu, int zs,
                                 const PadSpec& pu, const PadSpec& ps) {
    const auto& off = m.b_off[op];
    int out_u =
        t.add(t.stencil_t(zu, off[0], m.B, true, pu), t.stencil_t(zs, off[2], m.B, true, pu));
    int out_s =
        t.add(t.stencil_t(zu, off[1], m.B, false, ps), t.stencil_t(zs, off[3], m.B, false, ps));
    return {out_u, out_s};
}

}  // namespace

int sp_output_channels(bool dissipative) { return dissipative ? 4 : 2; }

SPClosure make_sp_closure(const CoarseSetup& setup, int hidden_layers, int hidden_channels,
                          int kernel, int B, bool dissipative, const CompressionOperator& comp,
                          uint64_t seed) {
    require(B >= 1, "make_sp_closure: B must be >= 1");
    SPClosure m;
    m.setup = setup;
    m.B = B;
    m.dissipative = dissipative;
    m.comp = comp;

    m.arch.channels = {3};
    for (int l = 0; l < hidden_layers; ++l) m.arch.channels.push_back(hidden_channels);
    m.arch.channels.push_back(sp_output_channels(dissipative));
    m.arch.kernels.assign(hidden_layers + 1, kernel);
    m.arch.validate();

    m.cnn = declare_convnet(m.params, m.arch, "cnn");
    const int first_op = dissipative ? 0 : 1;
    for (int op = 0; op < 3; ++op) {
        std::array<long, 4> offs{-1, -1, -1, -1};
        if (op >= first_op) {
            for (int b = 0; b < 4; ++b)
                offs[b] = static_cast<long>(m.params.add(
                    "B" + std::to_string(op + 1) + "." + kBlockNames[b], {2 * B + 1}));
        }
        m.b_off.push_back(offs);
    }

    Rng rng(seed);
    init_glorot(m.params, m.cnn, m.arch, rng);
    // B stencils: Glorot over a 2-channel 2x2 block operator.
    const double stddev = std::sqrt(2.0 / (2.0 * (2 * B + 1) + 2.0 * (2 * B + 1)));
    for (int op = first_op; op < 3; ++op)
        for (int b = 0; b < 4; ++b) {
            double* w = m.params.data() + m.b_off[op][b];
            for (int j = 0; j < 2 * B + 1; ++j) w[j] = rng.normal(0.0, stddev);
        }
    return m;
}

VanillaCNNClosure make_vanilla_closure(const CoarseSetup& setup, int hidden_layers,
                                       int hidden_channels, int kernel, uint64_t seed) {
    VanillaCNNClosure m;
    m.setup = setup;
    m.arch.channels = {2};
    for (int l = 0; l < hidden_layers; ++l) m.arch.channels.push_back(hidden_channels);
    m.arch.channels.push_back(1);
    m.arch.kernels.assign(hidden_layers + 1, kernel);
    m.arch.validate();
    m.cnn = declare_convnet(m.params, m.arch, "cnn");
    Rng rng(seed);
    init_glorot(m.params, m.cnn, m.arch, rng);
    return m;
}

std::vector<double> constrained_stencil_apply(const std::vector<double>& b,
                                              const std::vector<double>& f, bool constrained,
                                              const PadSpec& pad) {
    require(b.size() % 2 == 1, "constrained_stencil_apply: even-length stencil");
    const int B = static_cast<int>(b.size() / 2);
    auto wbar = constrain_weights(b, constrained);
    auto fp = pad_vector(f, B, pad);
    return stencil_valid(fp, wbar);
}

int sp_rhs_taped(Tape& t, const SPClosure& m, int a_var, const CoarseContext& ctx, double time,
                 SPPieces* pieces) {
    const int I = m.setup.grid.I;
    require(t.val(a_var).ch == 1 && t.val(a_var).n == 2 * I, "sp_rhs: state length != 2I");
    const PadSpec pu = ctx.pad_u(time);
    const PadSpec ps = ctx.pad_s();
    const double inv_H = 1.0 / m.setup.grid.H;

    int x = t.slice_len(a_var, 0, I);
    int y = t.slice_len(a_var, I, I);

    const int r = m.arch.receptive_radius();
    int fh_ext = fh_extended_taped(t, m.setup, x, ctx, time, r);
    int fh = t.slice_len(fh_ext, r, I);

    int stack = t.stack_ch({t.pad(x, r, pu), t.pad(y, r, ps), fh_ext});
    int fields = convnet_forward_taped(t, m.arch, m.cnn, stack);

    int k1, k2;
    if (m.dissipative) {
        k1 = t.slice_ch(fields, 2);
        k2 = t.slice_ch(fields, 3);
    } else {
        k1 = t.slice_ch(fields, 0);
        k2 = t.slice_ch(fields, 1);
    }

    // Skew term (B2^T k B3 - B3^T k B2) a.
    auto b3a = block_apply(t, m, 2, x, y, pu, ps);
    auto t1 = block_apply_t(t, m, 1, t.mul(k1, b3a[0]), t.mul(k2, b3a[1]), pu, ps);
    auto b2a = block_apply(t, m, 1, x, y, pu, ps);
    auto t2 = block_apply_t(t, m, 2, t.mul(k1, b2a[0]), t.mul(k2, b2a[1]), pu, ps);
    int skew_u = t.sub(t1[0], t2[0]);
    int skew_s = t.sub(t1[1], t2[1]);
    int clo_u = skew_u;
    int clo_s = skew_s;

    if (pieces) {
        pieces->fh = fh;
        pieces->skew_u = skew_u;
        pieces->skew_s = skew_s;
    }

    if (m.dissipative) {
        int q1 = t.slice_ch(fields, 0);
        int q2 = t.slice_ch(fields, 1);
        auto b1a = block_apply(t, m, 0, x, y, pu, ps);
        int qu = t.mul(q1, b1a[0]);
        int qs = t.mul(q2, b1a[1]);
        auto diss = block_apply_t(t, m, 0, t.mul(q1, qu), t.mul(q2, qs), pu, ps);
        clo_u = t.sub(clo_u, diss[0]);
        clo_s = t.sub(clo_s, diss[1]);
        if (pieces) {
            pieces->diss_u = diss[0];
            pieces->diss_s = diss[1];
            pieces->q_b1_u = qu;
            pieces->q_b1_s = qs;
        }
    }

    // Omega2^-1 as elementwise division by the diagonal.
    clo_u = t.scale_vec(clo_u, std::vector<double>(I, inv_H));
    clo_s = t.scale_vec(clo_s, std::vector<double>(I, inv_H));

    int rhs_u = t.add(fh, clo_u);
    int rhs_s = clo_s;
    if (!ctx.forcing_u.empty()) {
        rhs_u = t.add(rhs_u, t.leaf(ctx.forcing_u));
        rhs_s = t.add(rhs_s, t.leaf(ctx.forcing_s));
    }
    return t.concat_len(rhs_u, rhs_s);
}

int vanilla_rhs_taped(Tape& t, const VanillaCNNClosure& m, int u_var, const CoarseContext& ctx,
                      double time) {
    const int I = m.setup.grid.I;
    require(t.val(u_var).ch == 1 && t.val(u_var).n == I, "vanilla_rhs: state length != I");
    const PadSpec pu = ctx.pad_u(time);
    const double H = m.setup.grid.H;

    // Evaluate the CNN one cell wider than the interior so the forward
    // difference can consume the extra right value.
    const int r = m.arch.receptive_radius();
    int fh_ext = fh_extended_taped(t, m.setup, u_var, ctx, time, r + 1);
    int fh = t.slice_len(fh_ext, r + 1, I);
    int stack = t.stack_ch({t.pad(u_var, r + 1, pu), fh_ext});
    int cnn_ext = t.slice_ch(convnet_forward_taped(t, m.arch, m.cnn, stack), 0);  // length I+2
    int qc = t.fixed_stencil(cnn_ext, {-1.0, 1.0}, 0, 1.0 / H, I);

    int rhs = t.add(fh, qc);
    if (!ctx.forcing_u.empty()) rhs = t.add(rhs, t.leaf(ctx.forcing_u));
    return rhs;
}

std::vector<double> sp_rhs(const SPClosure& m, const std::vector<double>& a,
                           const CoarseContext& ctx, double t) {
    Tape tape(&m.params);
    int av = tape.leaf(a);
    return tape.val(sp_rhs_taped(tape, m, av, ctx, t)).v;
}

SPEnergyAudit sp_energy_audit(const SPClosure& m, const std::vector<double>& a,
                              const CoarseContext& ctx, double t) {
    const int I = m.setup.grid.I;
    const double H = m.setup.grid.H;
    CoarseContext bare = ctx;
    bare.forcing_u.clear();
    bare.forcing_s.clear();

    Tape tape(&m.params);
    SPPieces p;
    int av = tape.leaf(a);
    int rhs = sp_rhs_taped(tape, m, av, bare, t, &p);

    SPEnergyAudit audit;
    const auto& fh = tape.val(p.fh).v;
    for (int i = 0; i < I; ++i) audit.resolved_rate += a[i] * H * fh[i];

    const auto& su = tape.val(p.skew_u).v;
    const auto& ss = tape.val(p.skew_s).v;
    // a^T Omega2 Omega2^-1 (skew) = a^T (skew).
    for (int i = 0; i < I; ++i) audit.skew_rate += a[i] * su[i] + a[I + i] * ss[i];

    if (m.dissipative) {
        const auto& du = tape.val(p.diss_u).v;
        const auto& ds = tape.val(p.diss_s).v;
        for (int i = 0; i < I; ++i) audit.diss_rate -= a[i] * du[i] + a[I + i] * ds[i];
        audit.q_norm_sq = norm2_sq(tape.val(p.q_b1_u).v) + norm2_sq(tape.val(p.q_b1_s).v);
    }

    const auto& g = tape.val(rhs).v;
    for (int i = 0; i < 2 * I; ++i) audit.total_rate += a[i] * H * g[i];
    return audit;
}

std::vector<double> vanilla_cnn_rhs(const VanillaCNNClosure& m, const std::vector<double>& ubar,
                                    const CoarseContext& ctx, double t) {
    Tape tape(&m.params);
    int uv = tape.leaf(ubar);
    return tape.val(vanilla_rhs_taped(tape, m, uv, ctx, t)).v;
}

std::vector<double> smagorinsky_rhs(const SmagorinskyClosure& m, const std::vector<double>& ubar,
                                    const CoarseContext& ctx, double t) {
    require(m.c_s >= 0.0, "smagorinsky_rhs: C_s must be >= 0");
    const int I = m.setup.grid.I;
    const double H = m.setup.grid.H;
    auto out = no_closure_rhs(NoClosure{m.setup}, ubar, ctx, t);

    // Forward differences z_i = (u_{i+1}-u_i)/H on positions 0..I (padded by
    // one), learned eddy viscosity nu_t = (H C_s)^2 |z|, then the divergence
    // (nu_i z_i - nu_{i-1} z_{i-1})/H.
    auto up = pad_vector(ubar, 1, ctx.pad_u(t));
    std::vector<double> z(I + 1), nu_t(I + 1);
    const double c2 = (H * m.c_s) * (H * m.c_s);
    for (int i = 0; i <= I; ++i) {
        z[i] = (up[i + 1] - up[i]) / H;
        nu_t[i] = c2 * std::abs(z[i]);
    }
    for (int i = 0; i < I; ++i) out[i] += (nu_t[i + 1] * z[i + 1] - nu_t[i] * z[i]) / H;
    return out;
}

std::vector<double> no_closure_rhs(const NoClosure& m, const std::vector<double>& ubar,
                                   const CoarseContext& ctx, double t) {
    PDEConfig cfg;
    cfg.kind = m.setup.eq;
    cfg.nu = m.setup.nu;
    cfg.epsilon = m.setup.epsilon;
    cfg.mu = m.setup.mu;
    BCSpec bc = ctx.periodic ? BCSpec::periodic() : BCSpec::inflow_outflow(ctx.inflow);
    auto out = full_rhs(cfg, ubar, m.setup.grid.H, bc, t);
    if (!ctx.forcing_u.empty())
        for (size_t i = 0; i < out.size(); ++i) out[i] += ctx.forcing_u[i];
    return out;
}

double sp_momentum_residual(const SPClosure& m, const std::vector<double>& a,
                            const CoarseContext& ctx, double t) {
    const int I = m.setup.grid.I;
    CoarseContext bare = ctx;
    bare.forcing_u.clear();
    bare.forcing_s.clear();
    auto rhs = sp_rhs(m, a, bare, t);

    Tape tape(&m.params);
    std::vector<double> ubar(a.begin(), a.begin() + I);
    int fh_ext = fh_extended_taped(tape, m.setup, tape.leaf(ubar), bare, t,
                                   0);
    const auto& fh = tape.val(fh_ext).v;
    double res = 0.0;
    for (int i = 0; i < I; ++i) res += m.setup.grid.H * (rhs[i] - fh[i]);
    return res;
}

int closure_state_size(const AnyClosure& model) {
    return std::visit([](const auto& m) { return m.state_size(); }, model);
}

const CoarseSetup& closure_setup(const AnyClosure& model) {
    return std::visit([](const auto& m) -> const CoarseSetup& { return m.setup; }, model);
}

std::vector<double> closure_rhs(const AnyClosure& model, const std::vector<double>& state,
                                const CoarseContext& ctx, double t) {
    return std::visit(
        [&](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SPClosure>) return sp_rhs(m, state, ctx, t);
            else if constexpr (std::is_same_v<T, VanillaCNNClosure>)
                return vanilla_cnn_rhs(m, state, ctx, t);
            else if constexpr (std::is_same_v<T, SmagorinskyClosure>)
                return smagorinsky_rhs(m, state, ctx, t);
            else
                return no_closure_rhs(m, state, ctx, t);
        },
        model);
}

Trajectory simulate_closure(const AnyClosure& model, const CoarseContext& ctx,
                            const std::vector<double>& state0, double dt, double T,
                            double save_every) {
    require(static_cast<int>(state0.size()) == closure_state_size(model),
            "simulate_closure: state size mismatch");
    // Overflow inside an rhs evaluation counts as divergence of the run, not
    // an error: return NaNs so the driver flags the blow-up time.
    auto rhs = [&](const std::vector<double>& s, double t) -> std::vector<double> {
        try {
            return closure_rhs(model, s, ctx, t);
        } catch (const std::runtime_error& e) {
            if (std::string(e.what()).find("non-finite") != std::string::npos)
                return std::vector<double>(s.size(), std::numeric_limits<double>::quiet_NaN());
            throw;
        }
    };
    return simulate_generic(rhs, state0, dt, T, save_every);
}

}  // namespace spclosure
