#pragma once

#include <vector>

namespace spclosure {

/// sqrt( (1/|Omega|) ||ub - ub_dns||^2_Omega ).
double nrmse(const std::vector<double>& ub, const std::vector<double>& ub_dns,
             const std::vector<double>& Omega, double domain_len);

/// (1/T) * sum_i dt * series_i over 0 <= i*dt <= T.
double integrated_nrmse(const std::vector<double>& series, double dt, double T);

/// Discrete momentum (1_mass, u)_mass and energy 1/2 ||u||^2_mass.
double momentum(const std::vector<double>& u, const std::vector<double>& mass);
double energy(const std::vector<double>& u, const std::vector<double>& mass);

/// Drift series x(t) - x(0).
std::vector<double> drift_series(const std::vector<double>& series);

/// Energy per wavenumber bin k = 0 .. floor(I/2), normalized so that
/// sum_k E(k) = 1/2 ||ubar||^2_Omega (Parseval). Periodic uniform grid.
std::vector<double> energy_spectrum(const std::vector<double>& ubar, double H);

/// Mean spectrum over a set of states.
std::vector<double> average_spectrum(const std::vector<std::vector<double>>& states, double H);

/// Gaussian kernel density estimate; bandwidth <= 0 selects Silverman's rule
/// sigma * (4/(3n))^(1/5).
class GaussianKde {
public:
    GaussianKde(std::vector<double> samples, double bandwidth = -1.0);
    double operator()(double x) const;
    double bandwidth() const { return bw_; }

private:
    std::vector<double> samples_;
    double bw_;
};

/// Largest and second-largest eigenvalues of the dissipation-difference
/// operator D_delta = h^2 D - (1/J) W^T (H^2 Dbar) W in unit-free form,
/// computed exactly via its block-circulant structure.
struct DissipationEigen {
    double lambda1;  // should be 0
    double lambda2;  // largest nonzero; negative means the fine operator dissipates more
};

DissipationEigen dissipation_eigen_check(int I, int J);

/// Dense D_delta (N x N, N = I*J), test oracle only.
std::vector<double> dense_dissipation_matrix(int I, int J);

}  // namespace spclosure
