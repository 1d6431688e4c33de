#include "spclosure/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spclosure {

SymEig jacobi_eigensymm(std::vector<double> a, int n, bool want_vectors) {
    if (n <= 0 || a.size() != static_cast<size_t>(n) * n)
        throw std::runtime_error("jacobi_eigensymm: bad dimensions");

    std::vector<double> v;
    if (want_vectors) {
        v.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;
    }
    auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
        if (off < 1e-300) break;
        double diag = 0.0;
        for (int i = 0; i < n; ++i) diag += A(i, i) * A(i, i);
        if (off <= 1e-30 * std::max(diag, 1.0)) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = A(p, q);
                if (apq == 0.0) continue;
                double app = A(p, p), aqq = A(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                for (int k = 0; k < n; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                if (want_vectors) {
                    for (int k = 0; k < n; ++k) {
                        double vkp = v[static_cast<size_t>(k) * n + p];
                        double vkq = v[static_cast<size_t>(k) * n + q];
                        v[static_cast<size_t>(k) * n + p] = c * vkp - s * vkq;
                        v[static_cast<size_t>(k) * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    // Sort ascending, carrying eigenvector columns along.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = A(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return diag[i] < diag[j]; });

    SymEig out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = diag[order[i]];
    if (want_vectors) {
        out.vectors.assign(static_cast<size_t>(n) * n, 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                out.vectors[static_cast<size_t>(i) * n + k] =
                    v[static_cast<size_t>(i) * n + order[k]];
    }
    return out;
}

std::vector<double> symm_eigenvalues(const std::vector<double>& a, int n) {
    return jacobi_eigensymm(a, n, false).values;
}

}  // namespace spclosure
