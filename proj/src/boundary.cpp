#include "spclosure/boundary.hpp"

#include "spclosure/tensor.hpp"

namespace spclosure {

std::vector<double> pad_vector(const std::vector<double>& x, int depth, const PadSpec& spec) {
    const int n = static_cast<int>(x.size());
    require(n >= 1, "pad_vector: empty input");
    require(depth >= 0, "pad_vector: negative depth");
    if (spec.mode != PadMode::Periodic)
        require(depth <= n, "pad_vector: ghost depth exceeds length");

    std::vector<double> out(n + 2 * depth);
    for (int i = 0; i < n; ++i) out[depth + i] = x[i];
    switch (spec.mode) {
        case PadMode::Periodic:
            // Index wrap; stencils wider than the domain wrap repeatedly.
            for (int i = 1; i <= depth; ++i) {
                out[depth - i] = x[(n - (i % n)) % n];
                out[depth + n - 1 + i] = x[(i - 1) % n];
            }
            break;
        case PadMode::GhostU:
            for (int i = 1; i <= depth; ++i) {
                out[depth - i] = 2.0 * spec.alpha - x[i - 1];
                out[depth + n - 1 + i] = x[n - i];
            }
            break;
        case PadMode::GhostS:
            for (int i = 1; i <= depth; ++i) {
                out[depth - i] = -spec.rho * x[i - 1];
                out[depth + n - 1 + i] = spec.rho * x[n - i];
            }
            break;
    }
    return out;
}

void fold_pad_adjoint(const std::vector<double>& gpad, int depth, const PadSpec& spec,
                      std::vector<double>& gx) {
    const int n = static_cast<int>(gx.size());
    for (int i = 0; i < n; ++i) gx[i] += gpad[depth + i];
    switch (spec.mode) {
        case PadMode::Periodic:
            for (int i = 1; i <= depth; ++i) {
                gx[(n - (i % n)) % n] += gpad[depth - i];
                gx[(i - 1) % n] += gpad[depth + n - 1 + i];
            }
            break;
        case PadMode::GhostU:
            for (int i = 1; i <= depth; ++i) {
                gx[i - 1] -= gpad[depth - i];
                gx[n - i] += gpad[depth + n - 1 + i];
            }
            break;
        case PadMode::GhostS:
            for (int i = 1; i <= depth; ++i) {
                gx[i - 1] += -spec.rho * gpad[depth - i];
                gx[n - i] += spec.rho * gpad[depth + n - 1 + i];
            }
            break;
    }
}

std::vector<double> fine_ghosts(const std::vector<double>& u, double alpha, int depth) {
    return pad_vector(u, depth, PadSpec{PadMode::GhostU, alpha, 0.0});
}

std::vector<double> coarse_ghosts(const std::vector<double>& ubar, double alpha, int depth) {
    return pad_vector(ubar, depth, PadSpec{PadMode::GhostU, alpha, 0.0});
}

std::vector<double> sgs_ghosts(const std::vector<double>& s, double rho, int depth) {
    return pad_vector(s, depth, PadSpec{PadMode::GhostS, 0.0, rho});
}

double reflection_scalar(const std::vector<double>& t, int J) {
    require(static_cast<int>(t.size()) == J, "reflection_scalar: t length != J");
    double acc = 0.0;
    for (int j = 0; j < J; ++j) acc += t[j] * t[J - 1 - j];
    return J * acc;
}

}  // namespace spclosure
