#pragma once

#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "spclosure/compression.hpp"
#include "spclosure/convnet.hpp"
#include "spclosure/grid.hpp"
#include "spclosure/pde.hpp"

namespace spclosure {

/// Coarse-grid equation setup shared by all closure models.
struct CoarseSetup {
    Equation eq = Equation::Burgers;
    double nu = 0.0;
    double epsilon = 1.0;
    double mu = 1.0;
    GridPair grid;  // I, J, H of the model's grid pair
};

/// Per-simulation boundary/forcing context. Periodic runs leave inflow unset;
/// inflow/outflow runs evaluate alpha at RK4 stage times. Forcing is stored
/// pre-transformed: W F on the resolved half, T_s(I-RW) F on the SGS half.
struct CoarseContext {
    bool periodic = true;
    std::function<double(double)> inflow;
    double rho = 0.0;                  // SGS ghost reflection scalar
    std::vector<double> forcing_u;     // length I, empty when unforced
    std::vector<double> forcing_s;     // length I (SP only), empty when unforced

    PadSpec pad_u(double t) const {
        if (periodic) return PadSpec{PadMode::Periodic, 0.0, 0.0};
        return PadSpec{PadMode::GhostU, inflow(t), 0.0};
    }
    PadSpec pad_s() const {
        if (periodic) return PadSpec{PadMode::Periodic, 0.0, 0.0};
        return PadSpec{PadMode::GhostS, 0.0, rho};
    }
};

/// Structure-preserving closure: extended state a = [ubar; s],
///   G(a) = [f_H(ubar); 0] + Omega2^-1 (B2^T k B3 - B3^T k B2) a
///          - Omega2^-1 B1^T q^2 B1 a  (+ T F),
/// with diagonal fields (q1,q2,k1,k2) from a CNN on (ubar, s, f_H(ubar)).
/// The first-column blocks of every B_i are zero-sum, which pins the closure
/// momentum to zero; the skew/dissipative split pins the energy balance.
/// Without the dissipative branch (KdV) the CNN emits only (k1,k2) and B1 is
/// absent.
struct SPClosure {
    CoarseSetup setup;
    ConvArch arch;
    int B = 1;  // stencil half-width of the B_i blocks
    bool dissipative = true;
    ParameterSet params;
    ConvNetParams cnn;
    // Stencil offsets indexed [operator][block], blocks ordered 11,12,21,22;
    // operator 0 = B1 (dissipative only), 1 = B2, 2 = B3.
    std::vector<std::array<long, 4>> b_off;
    CompressionOperator comp;

    int state_size() const { return 2 * setup.grid.I; }
    int ghost_depth() const { return arch.receptive_radius() + B; }
};

/// Vanilla CNN closure: d(ubar)/dt = f_H(ubar) + Qbar CNN(ubar, f_H(ubar)),
/// momentum-conserving because 1^T Qbar = 0.
struct VanillaCNNClosure {
    CoarseSetup setup;
    ConvArch arch;
    ParameterSet params;
    ConvNetParams cnn;

    int state_size() const { return setup.grid.I; }
};

/// Constant Smagorinsky: f_H - Qbar^T diag(nu_t) Qbar ubar with
/// nu_t = (H C_s)^2 |Qbar ubar|.
struct SmagorinskyClosure {
    CoarseSetup setup;
    double c_s = 0.0;

    int state_size() const { return setup.grid.I; }
};

/// Coarse-grid discretization only.
struct NoClosure {
    CoarseSetup setup;

    int state_size() const { return setup.grid.I; }
};

/// Spec'd number of SP CNN output channels for a given dissipative flag.
int sp_output_channels(bool dissipative);

/// Build an SP closure with declared parameters (Glorot CNN + Glorot B
/// stencils) for the given architecture of hidden layers.
SPClosure make_sp_closure(const CoarseSetup& setup, int hidden_layers, int hidden_channels,
                          int kernel, int B, bool dissipative, const CompressionOperator& comp,
                          uint64_t seed);

VanillaCNNClosure make_vanilla_closure(const CoarseSetup& setup, int hidden_layers,
                                       int hidden_channels, int kernel, uint64_t seed);

/// Convolution with optionally zero-sum (mean-subtracted) weights.
std::vector<double> constrained_stencil_apply(const std::vector<double>& b,
                                              const std::vector<double>& f, bool constrained,
                                              const PadSpec& pad);

/// Intermediate tape variables of one SP rhs evaluation, for structure audits.
struct SPPieces {
    int fh = -1;                      // f_H(ubar), length I
    int skew_u = -1, skew_s = -1;     // skew term halves, before Omega2^-1
    int diss_u = -1, diss_s = -1;     // B1^T q^2 B1 a halves (dissipative only)
    int q_b1_u = -1, q_b1_s = -1;     // q .* (B1 a) halves, so ||Q a||^2 is their sumsq
};

/// Taped right-hand sides (used for training and for plain evaluation via a
/// scratch tape, so there is exactly one formula).
int sp_rhs_taped(Tape& tape, const SPClosure& m, int a_var, const CoarseContext& ctx, double t,
                 SPPieces* pieces = nullptr);
int vanilla_rhs_taped(Tape& tape, const VanillaCNNClosure& m, int u_var, const CoarseContext& ctx,
                      double t);

std::vector<double> sp_rhs(const SPClosure& m, const std::vector<double>& a,
                           const CoarseContext& ctx, double t);
std::vector<double> vanilla_cnn_rhs(const VanillaCNNClosure& m, const std::vector<double>& ubar,
                                    const CoarseContext& ctx, double t);
std::vector<double> smagorinsky_rhs(const SmagorinskyClosure& m, const std::vector<double>& ubar,
                                    const CoarseContext& ctx, double t);
std::vector<double> no_closure_rhs(const NoClosure& m, const std::vector<double>& ubar,
                                   const CoarseContext& ctx, double t);

/// (1_Omega, 0)^T Omega2 * (closure part of the SP rhs); zero for any theta
/// under periodic BCs.
double sp_momentum_residual(const SPClosure& m, const std::vector<double>& a,
                            const CoarseContext& ctx, double t);

/// Semi-discrete energy budget of one SP rhs evaluation:
///   d/dt (1/2 ||a||^2_Omega2) = resolved_rate - q_norm_sq,
/// with skew_rate the (machine-zero) skew contribution and diss_rate the
/// dissipative contribution a^T Omega2 (-Omega2^-1 B1^T q^2 B1 a).
struct SPEnergyAudit {
    double resolved_rate = 0.0;  // (ubar, f_H(ubar))_Omega
    double skew_rate = 0.0;
    double diss_rate = 0.0;
    double q_norm_sq = 0.0;  // ||q .* B1 a||_2^2
    double total_rate = 0.0; // a^T Omega2 G(a), forcing excluded
};

SPEnergyAudit sp_energy_audit(const SPClosure& m, const std::vector<double>& a,
                              const CoarseContext& ctx, double t);

using AnyClosure = std::variant<SPClosure, VanillaCNNClosure, SmagorinskyClosure, NoClosure>;

int closure_state_size(const AnyClosure& model);
const CoarseSetup& closure_setup(const AnyClosure& model);
std::vector<double> closure_rhs(const AnyClosure& model, const std::vector<double>& state,
                                const CoarseContext& ctx, double t);

/// March a closure model with RK4 (shares the generic driver with the fine
/// solver, including divergence flagging).
Trajectory simulate_closure(const AnyClosure& model, const CoarseContext& ctx,
                            const std::vector<double>& state0, double dt, double T,
                            double save_every);

}  // namespace spclosure
