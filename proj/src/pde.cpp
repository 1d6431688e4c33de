#include "spclosure/pde.hpp"

#include <chrono>
#include <cmath>

#include "spclosure/kernels.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

PadSpec BCSpec::pad_spec(double t) const {
    if (kind == Kind::Periodic) return PadSpec{PadMode::Periodic, 0.0, 0.0};
    require(static_cast<bool>(inflow), "BCSpec: inflow function not set");
    return PadSpec{PadMode::GhostU, inflow(t), 0.0};
}

std::vector<double> convection_rhs(const std::vector<double>& u, double h, const BCSpec& bc,
                                   double t) {
    require(u.size() >= 3, "convection_rhs: need at least 3 cells");
    auto up = pad_vector(u, 1, bc.pad_spec(t));
    return convection_valid(up, 1.0 / (6.0 * h));
}

std::vector<double> diffusion_rhs(const std::vector<double>& u, double nu, double h,
                                  const BCSpec& bc, double t) {
    require(nu >= 0.0, "diffusion_rhs: negative viscosity");
    auto up = pad_vector(u, 1, bc.pad_spec(t));
    static const std::vector<double> w{1.0, -2.0, 1.0};
    return fixed_stencil_valid(up, static_cast<int>(u.size()), w, -1, nu / (h * h));
}

std::vector<double> diffusion_rhs(const std::vector<double>& u, const std::vector<double>& nu,
                                  double h, const BCSpec& bc, double t) {
    require(nu.size() == u.size(), "diffusion_rhs: nu length mismatch");
    for (double v : nu) require(v >= 0.0, "diffusion_rhs: negative viscosity");
    const int n = static_cast<int>(u.size());
    auto up = pad_vector(u, 1, bc.pad_spec(t));
    // nu on ghost cells: wrap for periodic, clamp for inflow/outflow.
    const bool periodic = bc.kind == BCSpec::Kind::Periodic;
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double num = (i == 0) ? (periodic ? nu[n - 1] : nu[0]) : nu[i - 1];
        out[i] = inv_h2 * (nu[i] * (up[i + 2] - up[i + 1]) + num * (up[i] - up[i + 1]));
    }
    return out;
}

std::vector<double> kdv_dispersion_rhs(const std::vector<double>& u, double mu, double h,
                                       const BCSpec& bc) {
    require(bc.kind == BCSpec::Kind::Periodic, "kdv_dispersion_rhs: periodic BCs only");
    require(u.size() >= 5, "kdv_dispersion_rhs: need at least 5 cells");
    auto up = pad_vector(u, 2, PadSpec{PadMode::Periodic, 0.0, 0.0});
    static const std::vector<double> w{-1.0, 2.0, 0.0, -2.0, 1.0};
    return fixed_stencil_valid(up, static_cast<int>(u.size()), w, -2, -mu / (2.0 * h * h * h));
}

std::vector<double> full_rhs(const PDEConfig& cfg, const std::vector<double>& u, double h,
                             const BCSpec& bc, double t) {
    std::vector<double> out;
    if (cfg.kind == Equation::Burgers) {
        out = convection_rhs(u, h, bc, t);
        if (cfg.nu != 0.0) {
            auto d = diffusion_rhs(u, cfg.nu, h, bc, t);
            for (size_t i = 0; i < out.size(); ++i) out[i] += d[i];
        }
    } else {
        out = convection_rhs(u, h, bc, t);
        for (double& v : out) v *= cfg.epsilon;
        auto d = kdv_dispersion_rhs(u, cfg.mu, h, bc);
        for (size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    if (cfg.forcing) {
        require(cfg.forcing->size() == u.size(), "full_rhs: forcing length mismatch");
        for (size_t i = 0; i < out.size(); ++i) out[i] += (*cfg.forcing)[i];
    }
    return out;
}

std::vector<double> rk4_step(
    const std::function<std::vector<double>(const std::vector<double>&, double)>& rhs,
    const std::vector<double>& state, double t, double dt) {
    require(dt > 0.0, "rk4_step: dt must be positive");
    const size_t n = state.size();
    auto k1 = rhs(state, t);

    std::vector<double> tmp(n);
    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    auto k2 = rhs(tmp, t + 0.5 * dt);

    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    auto k3 = rhs(tmp, t + 0.5 * dt);

    for (size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    auto k4 = rhs(tmp, t + dt);

    std::vector<double> out(n);
    const double w = dt / 6.0;
    for (size_t i = 0; i < n; ++i)
        out[i] = state[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

Trajectory simulate_generic(
    const std::function<std::vector<double>(const std::vector<double>&, double)>& rhs,
    const std::vector<double>& u0, double dt, double T, double save_every) {
    require(T > 0.0 && dt > 0.0, "simulate: T and dt must be positive");
    const int steps_per_save = static_cast<int>(std::llround(save_every / dt));
    require(steps_per_save >= 1 &&
                std::abs(steps_per_save * dt - save_every) <= 1e-9 * save_every,
            "simulate: dt must divide save_every");
    const long long n_steps = std::llround(T / dt);

    auto t_start = std::chrono::steady_clock::now();
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);

    std::vector<double> u = u0;
    for (long long step = 0; step < n_steps; ++step) {
        const double t = step * dt;
        u = rk4_step(rhs, u, t, dt);
        bool finite = true;
        for (double x : u)
            if (!std::isfinite(x)) {
                finite = false;
                break;
            }
        if (!finite) {
            traj.stable = false;
            traj.blowup_time = (step + 1) * dt;
            break;
        }
        if ((step + 1) % steps_per_save == 0) {
            traj.times.push_back((step + 1) * dt);
            traj.states.push_back(u);
        }
    }
    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return traj;
}

Trajectory simulate(const PDEConfig& cfg, const BCSpec& bc, const std::vector<double>& u0,
                    double h, double dt, double T, double save_every) {
    auto rhs = [&](const std::vector<double>& u, double t) { return full_rhs(cfg, u, h, bc, t); };
    return simulate_generic(rhs, u0, dt, T, save_every);
}

}  // namespace spclosure
