#pragma once

#include <functional>
#include <vector>

namespace spclosure {

/// Padding rule for extending a vector past the domain boundary.
///   Periodic : index wrap.
///   GhostU   : inflow/outflow velocity ghosts, left u_{-i+1} = 2*alpha - u_i,
///              right u_{N+i} = u_{N-i+1} (symmetric outflow).
///   GhostS   : SGS-variable ghosts, left s_{-i+1} = -rho*s_i,
///              right s_{I+i} = +rho*s_{I-i+1}, rho = J t^T P t.
enum class PadMode { Periodic, GhostU, GhostS };

struct PadSpec {
    PadMode mode = PadMode::Periodic;
    double alpha = 0.0;  // inflow value at the current time (GhostU)
    double rho = 0.0;    // reflection scalar (GhostS)
};

/// Ghost-cell context for one closure run: depth k equals the total
/// receptive-field radius of the model (sum of CNN kernel radii plus B).
struct GhostSpec {
    int depth = 0;
    std::function<double(double)> inflow;  // alpha(t), evaluated at stage times
    double rho = 0.0;
};

/// Extend x by `depth` ghost values on each side according to `spec`.
std::vector<double> pad_vector(const std::vector<double>& x, int depth, const PadSpec& spec);

/// Adjoint of the linear part of pad_vector: accumulate d(pad)/d(x)^T * gpad
/// into gx (the affine inflow offset drops out).
void fold_pad_adjoint(const std::vector<double>& gpad, int depth, const PadSpec& spec,
                      std::vector<double>& gx);

/// Fine-grid inflow/outflow ghosts (velocity rule).
std::vector<double> fine_ghosts(const std::vector<double>& u, double alpha, int depth);

/// Coarse-grid inflow/outflow ghosts (same rule on filtered values).
std::vector<double> coarse_ghosts(const std::vector<double>& ubar, double alpha, int depth);

/// SGS-variable ghosts with reflection scalar rho.
std::vector<double> sgs_ghosts(const std::vector<double>& s, double rho, int depth);

/// rho = J t^T P t where P reverses indices; equals t_hat^T P t_hat, so
/// |rho| <= 1 for a unit-norm t_hat.
double reflection_scalar(const std::vector<double>& t_compression, int J);

}  // namespace spclosure
