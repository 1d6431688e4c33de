#include "spclosure/compression.hpp"

#include <algorithm>
#include <cmath>

#include "spclosure/linalg.hpp"

namespace spclosure {

std::vector<double> StateTransform::mass2() const {
    std::vector<double> m(2 * fp.grid.I, fp.grid.H);
    return m;
}

CompressionOperator fit_compression(const std::vector<std::vector<double>>& snapshots,
                                    const FilterPair& fp) {
    const GridPair& g = fp.grid;
    require(!snapshots.empty(), "fit_compression: need at least one snapshot");
    const int J = g.J;

    // Gram matrix X_mu X_mu^T (J x J), accumulated cell by cell.
    std::vector<double> gram(static_cast<size_t>(J) * J, 0.0);
    for (const auto& u : snapshots) {
        auto up = sgs_content(fp, u);
        for (int i = 0; i < g.I; ++i) {
            const double* mu = up.data() + static_cast<size_t>(i) * J;
            for (int a = 0; a < J; ++a)
                for (int b = 0; b <= a; ++b) gram[static_cast<size_t>(a) * J + b] += mu[a] * mu[b];
        }
    }
    for (int a = 0; a < J; ++a)
        for (int b = a + 1; b < J; ++b)
            gram[static_cast<size_t>(a) * J + b] = gram[static_cast<size_t>(b) * J + a];

    double trace = 0.0;
    for (int a = 0; a < J; ++a) trace += gram[static_cast<size_t>(a) * J + a];
    require(trace > 0.0, "fit_compression: SGS content is identically zero, no direction defined");

    auto eig = jacobi_eigensymm(gram, J, true);
    CompressionOperator comp;
    comp.J = J;
    comp.t_hat.resize(J);
    for (int a = 0; a < J; ++a)
        comp.t_hat[a] = eig.vectors[static_cast<size_t>(a) * J + (J - 1)];  // largest eigenvalue

    // Deterministic sign: largest-magnitude entry positive, first on ties.
    int imax = 0;
    for (int a = 1; a < J; ++a)
        if (std::abs(comp.t_hat[a]) > std::abs(comp.t_hat[imax])) imax = a;
    if (comp.t_hat[imax] < 0.0)
        for (double& v : comp.t_hat) v = -v;

    double nrm = std::sqrt(norm2_sq(comp.t_hat));
    for (double& v : comp.t_hat) v /= nrm;

    comp.t.resize(J);
    const double scale = 1.0 / std::sqrt(static_cast<double>(J));
    for (int a = 0; a < J; ++a) comp.t[a] = scale * comp.t_hat[a];
    return comp;
}

double compression_loss(const CompressionOperator& comp,
                        const std::vector<std::vector<double>>& snapshots,
                        const FilterPair& fp) {
    const GridPair& g = fp.grid;
    require(comp.J == g.J, "compression_loss: compression factor mismatch");
    const int J = g.J;
    const double inv_j = 1.0 / J;
    double acc = 0.0;
    for (const auto& u : snapshots) {
        auto up = sgs_content(fp, u);
        for (int i = 0; i < g.I; ++i) {
            const double* mu = up.data() + static_cast<size_t>(i) * J;
            double mu2 = 0.0, t_mu = 0.0;
            for (int a = 0; a < J; ++a) {
                mu2 += mu[a] * mu[a];
                t_mu += comp.t[a] * mu[a];
            }
            acc += std::abs(inv_j * mu2 - t_mu * t_mu);
        }
    }
    return acc / (static_cast<double>(snapshots.size()) * g.I);
}

std::vector<double> to_state(const StateTransform& st, const std::vector<double>& u) {
    const GridPair& g = st.fp.grid;
    require(static_cast<int>(u.size()) == g.N, "to_state: expected length N");
    std::vector<double> a(2 * g.I);
    auto up = sgs_content(st.fp, u);
    const double inv_j = 1.0 / g.J;
    for (int i = 0; i < g.I; ++i) {
        double mean = 0.0, s = 0.0;
        const double* cell = u.data() + static_cast<size_t>(i) * g.J;
        for (int j = 0; j < g.J; ++j) mean += cell[j];
        a[i] = mean * inv_j;
        const double* mu = up.data() + static_cast<size_t>(i) * g.J;
        for (int j = 0; j < g.J; ++j) s += st.comp.t[j] * mu[j];
        a[g.I + i] = s;
    }
    return a;
}

std::vector<double> transform_rhs(const StateTransform& st, const std::vector<double>& du_dt) {
    return to_state(st, du_dt);
}

std::vector<double> dense_transform_matrix(const StateTransform& st) {
    const GridPair& g = st.fp.grid;
    const int rows = 2 * g.I, cols = g.N;
    std::vector<double> T(static_cast<size_t>(rows) * cols, 0.0);
    const double inv_j = 1.0 / g.J;
    for (int i = 0; i < g.I; ++i) {
        for (int j = 0; j < g.J; ++j) {
            const int col = i * g.J + j;
            T[static_cast<size_t>(i) * cols + col] = inv_j;
            // Row I+i is t^T (I - R W) restricted to cell i.
            double acc = 0.0;
            for (int a = 0; a < g.J; ++a) acc += st.comp.t[a] * ((a == j ? 1.0 : 0.0) - inv_j);
            T[static_cast<size_t>(g.I + i) * cols + col] = acc;
        }
    }
    return T;
}

}  // namespace spclosure
