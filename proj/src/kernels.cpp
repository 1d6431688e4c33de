#include "spclosure/kernels.hpp"

#include "spclosure/tensor.hpp"

namespace spclosure {

std::vector<double> convection_valid(const std::vector<double>& up, double c) {
    const int n = static_cast<int>(up.size()) - 2;
    require(n >= 1, "convection_valid: input too short");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double um = up[i], u0 = up[i + 1], uu = up[i + 2];
        out[i] = -c * (uu * uu - um * um) - c * u0 * (uu - um);
    }
    return out;
}

void convection_valid_adjoint(const std::vector<double>& up, double c,
                              const std::vector<double>& gout, std::vector<double>& g_up) {
    const int n = static_cast<int>(gout.size());
    for (int i = 0; i < n; ++i) {
        const double um = up[i], u0 = up[i + 1], uu = up[i + 2];
        const double g = gout[i];
        g_up[i] += g * c * (2.0 * um + u0);
        g_up[i + 1] += g * (-c) * (uu - um);
        g_up[i + 2] += g * (-c) * (2.0 * uu + u0);
    }
}

std::vector<double> fixed_stencil_valid(const std::vector<double>& xp, int n_out,
                                        const std::vector<double>& w, int lo, double scale) {
    const int len = static_cast<int>(w.size());
    const int pad = std::max(-lo, lo + len - 1);
    require(static_cast<int>(xp.size()) == n_out + 2 * pad,
            "fixed_stencil_valid: padded length mismatch");
    std::vector<double> out(n_out);
    for (int i = 0; i < n_out; ++i) {
        double s = 0.0;
        for (int j = 0; j < len; ++j) s += w[j] * xp[pad + i + lo + j];
        out[i] = scale * s;
    }
    return out;
}

void fixed_stencil_valid_adjoint(int n_out, const std::vector<double>& w, int lo, double scale,
                                 const std::vector<double>& gout, std::vector<double>& g_xp) {
    const int len = static_cast<int>(w.size());
    const int pad = std::max(-lo, lo + len - 1);
    for (int i = 0; i < n_out; ++i) {
        const double g = scale * gout[i];
        for (int j = 0; j < len; ++j) g_xp[pad + i + lo + j] += g * w[j];
    }
}

std::vector<double> stencil_valid(const std::vector<double>& xp,
                                  const std::vector<double>& wbar) {
    const int k = static_cast<int>(wbar.size());
    const int n = static_cast<int>(xp.size()) - (k - 1);
    require(k % 2 == 1, "stencil_valid: even-length stencil");
    require(n >= 1, "stencil_valid: input too short");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += wbar[j] * xp[i + j];
        out[i] = s;
    }
    return out;
}

std::vector<double> constrain_weights(const std::vector<double>& w, bool constrained) {
    if (!constrained) return w;
    double mean = sum(w) / static_cast<double>(w.size());
    std::vector<double> out(w.size());
    for (size_t j = 0; j < w.size(); ++j) out[j] = w[j] - mean;
    return out;
}

void conv1d_valid(const double* x, int ci, int lp, const double* w, const double* b, int co,
                  int k, double* out) {
    const int lo = lp - k + 1;
    for (int o = 0; o < co; ++o) {
        const double bias = b ? b[o] : 0.0;
        double* orow = out + static_cast<size_t>(o) * lo;
        for (int i = 0; i < lo; ++i) orow[i] = bias;
        for (int c = 0; c < ci; ++c) {
            const double* xrow = x + static_cast<size_t>(c) * lp;
            const double* wrow = w + (static_cast<size_t>(o) * ci + c) * k;
            for (int j = 0; j < k; ++j) {
                const double wj = wrow[j];
                for (int i = 0; i < lo; ++i) orow[i] += wj * xrow[i + j];
            }
        }
    }
}

void conv1d_valid_adjoint(const double* x, int ci, int lp, const double* w, int co, int k,
                          const double* gout, double* gx, double* gw, double* gb) {
    const int lo = lp - k + 1;
    for (int o = 0; o < co; ++o) {
        const double* grow = gout + static_cast<size_t>(o) * lo;
        if (gb) {
            double s = 0.0;
            for (int i = 0; i < lo; ++i) s += grow[i];
            gb[o] += s;
        }
        for (int c = 0; c < ci; ++c) {
            const double* xrow = x + static_cast<size_t>(c) * lp;
            const double* wrow = w + (static_cast<size_t>(o) * ci + c) * k;
            double* gxrow = gx ? gx + static_cast<size_t>(c) * lp : nullptr;
            double* gwrow = gw ? gw + (static_cast<size_t>(o) * ci + c) * k : nullptr;
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                const double wj = wrow[j];
                for (int i = 0; i < lo; ++i) {
                    const double g = grow[i];
                    if (gxrow) gxrow[i + j] += wj * g;
                    acc += xrow[i + j] * g;
                }
                if (gwrow) gwrow[j] += acc;
            }
        }
    }
}

}  // namespace spclosure
