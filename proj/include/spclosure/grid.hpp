#pragma once

#include <vector>

namespace spclosure {

/// Matched uniform fine/coarse grid pair covering [domain_start, domain_end].
/// N = I*J fine cells of width h, I coarse cells of width H = J*h. The mass
/// matrices are diagonal and kept explicit so every inner product carries its
/// measure; only uniform construction is provided.
struct GridPair {
    double domain_start = 0.0;
    double domain_end = 1.0;
    int N = 1;  // fine cells
    int I = 1;  // coarse cells
    int J = 1;  // compression factor, N = I*J
    double h = 1.0;
    double H = 1.0;
    std::vector<double> omega;  // fine mass diagonal, entries h
    std::vector<double> Omega;  // coarse mass diagonal, entries H

    double length() const { return domain_end - domain_start; }
    double fine_center(int i) const { return domain_start + (i + 0.5) * h; }
    double coarse_center(int i) const { return domain_start + (i + 0.5) * H; }
};

/// Spatial averaging filter W = Omega^-1 O omega and piecewise-constant
/// reconstruction R = O^T, stored as implicit stencil actions. Dense
/// materializations exist for test oracles only.
struct FilterPair {
    GridPair grid;
};

GridPair make_grid_pair(double domain_start, double domain_end, int I, int J);
FilterPair make_filter_pair(const GridPair& g);

/// ubar_i = mean of the J fine values in coarse cell i.
std::vector<double> apply_filter(const FilterPair& fp, const std::vector<double>& u);

/// Each coarse value repeated J times.
std::vector<double> reconstruct(const FilterPair& fp, const std::vector<double>& ubar);

/// u' = u - R W u. Filtering the result yields zero.
std::vector<double> sgs_content(const FilterPair& fp, const std::vector<double>& u);

/// (x, y)_mass = sum_i x_i mass_i y_i.
double inner_product(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& mass);

/// Conservative cell-average projection between uniform grids on the same
/// domain (used when the DNS resolution is not divisible by I).
std::vector<double> regrid(const std::vector<double>& u, int n_target);

/// Dense row-major operators, test oracles only.
std::vector<double> dense_filter_matrix(const FilterPair& fp);       // I x N
std::vector<double> dense_reconstruction_matrix(const FilterPair& fp);  // N x I

}  // namespace spclosure
