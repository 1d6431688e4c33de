#pragma once

#include <vector>

#include "spclosure/grid.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

/// Local linear SGS compression s_i = t^T mu_i with t = J^(-1/2) t_hat and
/// unit-norm t_hat (first left singular vector of the SGS snapshot matrix).
struct CompressionOperator {
    int J = 1;
    std::vector<double> t;      // length J
    std::vector<double> t_hat;  // unit norm, sign-fixed
};

/// Linear map u -> a = [W u; s], the combined filter + compression transform.
struct StateTransform {
    FilterPair fp;
    CompressionOperator comp;

    int state_size() const { return 2 * fp.grid.I; }
    /// Concatenated coarse mass diagonal [Omega; Omega].
    std::vector<double> mass2() const;
};

/// Fit t_hat as the dominant eigenvector of X_mu X_mu^T accumulated over all
/// per-cell SGS columns of the snapshots. Sign convention: the
/// largest-magnitude entry of t_hat is positive (first such entry on ties).
/// Throws if the SGS content is identically zero.
CompressionOperator fit_compression(const std::vector<std::vector<double>>& snapshots,
                                    const FilterPair& fp);

/// L_s = 1/(p*I) * sum over snapshots and cells of
/// | J^-1 mu^T mu - (t^T mu)^2 |.
double compression_loss(const CompressionOperator& comp,
                        const std::vector<std::vector<double>>& snapshots,
                        const FilterPair& fp);

/// a = [W u; s], s_i = t^T mu_i.
std::vector<double> to_state(const StateTransform& st, const std::vector<double>& u);

/// Same linear action applied to a tangent vector du/dt (or a forcing F).
std::vector<double> transform_rhs(const StateTransform& st, const std::vector<double>& du_dt);

/// Dense 2I x N transform matrix, test oracle only.
std::vector<double> dense_transform_matrix(const StateTransform& st);

}  // namespace spclosure
