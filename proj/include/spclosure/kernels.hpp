#pragma once

#include <vector>

#include "spclosure/boundary.hpp"

namespace spclosure {

// Low-level stencil kernels shared by the fine-grid solver, the plain closure
// evaluators, and the autodiff tape. All "valid" kernels consume a padded
// input and emit the interior.

/// Skew-symmetric convection split on a depth-1 padded input:
/// out_i = -c*(u_{i+1}^2 - u_{i-1}^2) - c*u_i*(u_{i+1} - u_{i-1}).
/// c = 1/(6h) makes this consistent with -(1/2) d(u^2)/dx.
std::vector<double> convection_valid(const std::vector<double>& up, double c);

/// Accumulate the adjoint of convection_valid into g_up.
void convection_valid_adjoint(const std::vector<double>& up, double c,
                              const std::vector<double>& gout, std::vector<double>& g_up);

/// Linear stencil with fixed weights over offsets [lo, lo+len-1]:
/// out_i = scale * sum_j w[j] * xp[pad + i + lo + j], for a pad of
/// max(-lo, lo+len-1).
std::vector<double> fixed_stencil_valid(const std::vector<double>& xp, int n_out,
                                        const std::vector<double>& w, int lo, double scale);

void fixed_stencil_valid_adjoint(int n_out, const std::vector<double>& w, int lo, double scale,
                                 const std::vector<double>& gout, std::vector<double>& g_xp);

/// Learned odd stencil of radius B applied to a padded input (length n+2B).
std::vector<double> stencil_valid(const std::vector<double>& xp, const std::vector<double>& wbar);

/// Zero-sum projection b_bar_j = b_j - mean(b); identity when !constrained.
std::vector<double> constrain_weights(const std::vector<double>& w, bool constrained);

/// Multichannel valid convolution: x is (ci x lp) row-major, weights are
/// (co x ci x k), bias (co); output (co x (lp-k+1)).
void conv1d_valid(const double* x, int ci, int lp, const double* w, const double* b, int co,
                  int k, double* out);

/// Adjoints of conv1d_valid; gx/gw/gb are accumulated (any may be null).
void conv1d_valid_adjoint(const double* x, int ci, int lp, const double* w, int co, int k,
                          const double* gout, double* gx, double* gw, double* gb);

}  // namespace spclosure
