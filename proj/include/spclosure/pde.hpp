#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "spclosure/boundary.hpp"

namespace spclosure {

enum class Equation { Burgers, KdV };

/// Structure-preserving fine-grid right-hand sides. Burgers:
/// du/dt = C(u)u + nu*D*u + F with skew-symmetric convection and
/// D = -Q^T Q. KdV: du/dt = eps*C(u)u + dispersion (periodic only).
struct PDEConfig {
    Equation kind = Equation::Burgers;
    double nu = 0.0;       // Burgers viscosity >= 0
    double epsilon = 1.0;  // KdV convection scale
    double mu = 1.0;       // KdV dispersion scale
    std::optional<std::vector<double>> forcing;  // steady fine-grid forcing
};

struct BCSpec {
    enum class Kind { Periodic, InflowOutflow } kind = Kind::Periodic;
    std::function<double(double)> inflow;  // alpha(t), InflowOutflow only

    static BCSpec periodic() { return BCSpec{}; }
    static BCSpec inflow_outflow(std::function<double(double)> alpha) {
        BCSpec bc;
        bc.kind = Kind::InflowOutflow;
        bc.inflow = std::move(alpha);
        return bc;
    }
    PadSpec pad_spec(double t) const;
};

/// (C(u)u)_i = -(1/3h)(u_{i+1}^2 - u_{i-1}^2) - (1/3h) u_i (u_{i+1} - u_{i-1}).
std::vector<double> convection_rhs(const std::vector<double>& u, double h, const BCSpec& bc,
                                   double t);

/// Constant-viscosity diffusion nu * D u.
std::vector<double> diffusion_rhs(const std::vector<double>& u, double nu, double h,
                                  const BCSpec& bc, double t);

/// Variable-viscosity diffusion (per-cell nu):
/// (1/h^2)(nu_i (u_{i+1}-u_i) + nu_{i-1} (u_{i-1}-u_i)).
std::vector<double> diffusion_rhs(const std::vector<double>& u, const std::vector<double>& nu,
                                  double h, const BCSpec& bc, double t);

/// -mu * (-u_{i-2} + 2u_{i-1} - 2u_{i+1} + u_{i+2}) / (2h^3), periodic only.
std::vector<double> kdv_dispersion_rhs(const std::vector<double>& u, double mu, double h,
                                       const BCSpec& bc);

std::vector<double> full_rhs(const PDEConfig& cfg, const std::vector<double>& u, double h,
                             const BCSpec& bc, double t);

/// Classic 4-stage Runge-Kutta update. Throws on non-finite stage values.
std::vector<double> rk4_step(
    const std::function<std::vector<double>(const std::vector<double>&, double)>& rhs,
    const std::vector<double>& state, double t, double dt);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    bool stable = true;
    double blowup_time = 0.0;  // time of first non-finite state when !stable
    double wall_seconds = 0.0;
};

/// March u0 with RK4, saving at multiples of save_every. On divergence the
/// partial trajectory is returned with stable=false and the blow-up time.
Trajectory simulate(const PDEConfig& cfg, const BCSpec& bc, const std::vector<double>& u0,
                    double h, double dt, double T, double save_every);

/// Generic driver used by both the fine solver and the coarse closure runs.
Trajectory simulate_generic(
    const std::function<std::vector<double>(const std::vector<double>&, double)>& rhs,
    const std::vector<double>& u0, double dt, double T, double save_every);

}  // namespace spclosure
