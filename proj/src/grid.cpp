#include "spclosure/grid.hpp"

#include <stdexcept>
#include <string>

#include "spclosure/tensor.hpp"

namespace spclosure {

GridPair make_grid_pair(double domain_start, double domain_end, int I, int J) {
    require(I >= 1, "make_grid_pair: I must be >= 1");
    require(J >= 1, "make_grid_pair: J must be >= 1");
    require(domain_end > domain_start, "make_grid_pair: degenerate interval");

    GridPair g;
    g.domain_start = domain_start;
    g.domain_end = domain_end;
    g.I = I;
    g.J = J;
    g.N = I * J;
    g.h = (domain_end - domain_start) / g.N;
    g.H = g.h * J;
    g.omega.assign(g.N, g.h);
    g.Omega.assign(g.I, g.H);
    return g;
}

FilterPair make_filter_pair(const GridPair& g) { return FilterPair{g}; }

std::vector<double> apply_filter(const FilterPair& fp, const std::vector<double>& u) {
    const GridPair& g = fp.grid;
    require(static_cast<int>(u.size()) == g.N, "apply_filter: expected length N=" +
                                                   std::to_string(g.N));
    std::vector<double> ubar(g.I);
    const double inv_j = 1.0 / g.J;
    for (int i = 0; i < g.I; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.J; ++j) s += u[static_cast<size_t>(i) * g.J + j];
        ubar[i] = s * inv_j;
    }
    return ubar;
}

std::vector<double> reconstruct(const FilterPair& fp, const std::vector<double>& ubar) {
    const GridPair& g = fp.grid;
    require(static_cast<int>(ubar.size()) == g.I, "reconstruct: expected length I=" +
                                                      std::to_string(g.I));
    std::vector<double> u(g.N);
    for (int i = 0; i < g.I; ++i)
        for (int j = 0; j < g.J; ++j) u[static_cast<size_t>(i) * g.J + j] = ubar[i];
    return u;
}

std::vector<double> sgs_content(const FilterPair& fp, const std::vector<double>& u) {
    const GridPair& g = fp.grid;
    require(static_cast<int>(u.size()) == g.N, "sgs_content: expected length N=" +
                                                   std::to_string(g.N));
    std::vector<double> up(g.N);
    const double inv_j = 1.0 / g.J;
    for (int i = 0; i < g.I; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.J; ++j) s += u[static_cast<size_t>(i) * g.J + j];
        const double mean = s * inv_j;
        for (int j = 0; j < g.J; ++j)
            up[static_cast<size_t>(i) * g.J + j] = u[static_cast<size_t>(i) * g.J + j] - mean;
    }
    return up;
}

double inner_product(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& mass) {
    require(x.size() == y.size() && x.size() == mass.size(), "inner_product: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * mass[i] * y[i];
    return s;
}

std::vector<double> regrid(const std::vector<double>& u, int n_target) {
    require(n_target >= 1, "regrid: target size must be >= 1");
    const int n_src = static_cast<int>(u.size());
    require(n_src >= 1, "regrid: empty input");
    if (n_src == n_target) return u;

    // Target cell [a,b) on the unit interval; average the overlapped source
    // cells with their overlap fractions. Exact for the piecewise-constant
    // interpretation of cell values.
    std::vector<double> out(n_target, 0.0);
    const double ws = 1.0 / n_src;
    const double wt = 1.0 / n_target;
    for (int i = 0; i < n_target; ++i) {
        const double a = i * wt;
        const double b = (i + 1) * wt;
        int j0 = static_cast<int>(a / ws);
        if (j0 >= n_src) j0 = n_src - 1;
        double acc = 0.0;
        for (int j = j0; j < n_src; ++j) {
            const double ja = j * ws;
            if (ja >= b) break;
            const double jb = (j + 1) * ws;
            const double overlap = std::min(b, jb) - std::max(a, ja);
            if (overlap > 0.0) acc += overlap * u[j];
        }
        out[i] = acc / wt;
    }
    return out;
}

std::vector<double> dense_filter_matrix(const FilterPair& fp) {
    const GridPair& g = fp.grid;
    std::vector<double> w(static_cast<size_t>(g.I) * g.N, 0.0);
    for (int i = 0; i < g.I; ++i)
        for (int j = 0; j < g.J; ++j)
            w[static_cast<size_t>(i) * g.N + static_cast<size_t>(i) * g.J + j] = 1.0 / g.J;
    return w;
}

std::vector<double> dense_reconstruction_matrix(const FilterPair& fp) {
    const GridPair& g = fp.grid;
    std::vector<double> r(static_cast<size_t>(g.N) * g.I, 0.0);
    for (int i = 0; i < g.I; ++i)
        for (int j = 0; j < g.J; ++j)
            r[(static_cast<size_t>(i) * g.J + j) * g.I + i] = 1.0;
    return r;
}

}  // namespace spclosure
