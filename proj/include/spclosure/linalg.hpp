#pragma once

#include <vector>

namespace spclosure {

/// Dense symmetric matrix in row-major storage, n x n.
struct SymEig {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column k of the row-major n x n block = eigenvector k
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Deterministic; adequate for the small systems in this project (n <= ~200).
SymEig jacobi_eigensymm(std::vector<double> a, int n, bool want_vectors = true);

/// Eigenvalues only, ascending.
std::vector<double> symm_eigenvalues(const std::vector<double>& a, int n);

}  // namespace spclosure
