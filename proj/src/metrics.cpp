#include "spclosure/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "spclosure/linalg.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double nrmse(const std::vector<double>& ub, const std::vector<double>& ub_dns,
             const std::vector<double>& Omega, double domain_len) {
    require(ub.size() == ub_dns.size() && ub.size() == Omega.size(), "nrmse: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < ub.size(); ++i) {
        const double d = ub[i] - ub_dns[i];
        acc += d * Omega[i] * d;
    }
    return std::sqrt(acc / domain_len);
}

double integrated_nrmse(const std::vector<double>& series, double dt, double T) {
    double acc = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        if (i * dt > T + 1e-12) break;
        acc += dt * series[i];
    }
    return acc / T;
}

double momentum(const std::vector<double>& u, const std::vector<double>& mass) {
    require(u.size() == mass.size(), "momentum: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) acc += mass[i] * u[i];
    return acc;
}

double energy(const std::vector<double>& u, const std::vector<double>& mass) {
    require(u.size() == mass.size(), "energy: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) acc += mass[i] * u[i] * u[i];
    return 0.5 * acc;
}

std::vector<double> drift_series(const std::vector<double>& series) {
    std::vector<double> out(series.size());
    for (size_t i = 0; i < series.size(); ++i) out[i] = series[i] - series[0];
    return out;
}

std::vector<double> energy_spectrum(const std::vector<double>& ubar, double H) {
    const int I = static_cast<int>(ubar.size());
    require(I >= 1, "energy_spectrum: empty input");
    const int kmax = I / 2;
    std::vector<double> E(kmax + 1, 0.0);
    const double norm = 0.5 * H / I;
    // Direct DFT; I is small. Bin k pairs +k with -k so Parseval holds
    // exactly against 1/2 ||ubar||^2_Omega.
    for (int k = 0; k <= kmax; ++k) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < I; ++j) {
            const double ang = kTwoPi * k * j / I;
            re += ubar[j] * std::cos(ang);
            im -= ubar[j] * std::sin(ang);
        }
        const double mag = re * re + im * im;
        const bool self_paired = (k == 0) || (2 * k == I);
        E[k] = norm * (self_paired ? mag : 2.0 * mag);
    }
    return E;
}

std::vector<double> average_spectrum(const std::vector<std::vector<double>>& states, double H) {
    require(!states.empty(), "average_spectrum: no states");
    auto acc = energy_spectrum(states[0], H);
    for (size_t s = 1; s < states.size(); ++s) {
        auto e = energy_spectrum(states[s], H);
        for (size_t k = 0; k < acc.size(); ++k) acc[k] += e[k];
    }
    for (double& v : acc) v /= static_cast<double>(states.size());
    return acc;
}

GaussianKde::GaussianKde(std::vector<double> samples, double bandwidth)
    : samples_(std::move(samples)), bw_(bandwidth) {
    require(samples_.size() >= 2, "GaussianKde: need at least 2 samples");
    if (bw_ <= 0.0) {
        const double n = static_cast<double>(samples_.size());
        double mean = sum(samples_) / n;
        double var = 0.0;
        for (double x : samples_) var += (x - mean) * (x - mean);
        var /= (n - 1.0);
        double sigma = std::sqrt(var);
        if (sigma == 0.0) sigma = 1e-12;
        bw_ = sigma * std::pow(4.0 / (3.0 * n), 0.2);
    }
}

double GaussianKde::operator()(double x) const {
    const double inv = 1.0 / bw_;
    const double c = inv / std::sqrt(kTwoPi) / static_cast<double>(samples_.size());
    double acc = 0.0;
    for (double s : samples_) {
        const double z = (x - s) * inv;
        acc += std::exp(-0.5 * z * z);
    }
    return c * acc;
}

namespace {

// Circulant second-difference symbols: c(d) over an n-cycle.
double circ2(int d, int n) {
    double v = 0.0;
    d = ((d % n) + n) % n;
    if (d == 0) v += -2.0;
    if (d == 1 % n) v += 1.0;
    if (d == (n - 1) % n) v += 1.0;
    return v;
}

}  // namespace

std::vector<double> dense_dissipation_matrix(int I, int J) {
    const int N = I * J;
    std::vector<double> D(static_cast<size_t>(N) * N, 0.0);
    const double cJ3 = 1.0 / (static_cast<double>(J) * J * J);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            const int ic = r / J, jc = c / J;
            D[static_cast<size_t>(r) * N + c] = circ2(c - r, N) - cJ3 * circ2(jc - ic, I);
        }
    return D;
}

DissipationEigen dissipation_eigen_check(int I, int J) {
    require(I >= 2 && J >= 2, "dissipation_eigen_check: need I >= 2 and J >= 2");
    // D_delta is block-circulant over the coarse index: eigenvalues are the
    // union over coarse modes m of the spectra of the Hermitian symbol
    // Dhat(m) = sum_l B_l exp(-i theta m l). Solve each J x J Hermitian
    // problem through its real 2J x 2J embedding (every eigenvalue doubled).
    const double cJ3 = 1.0 / (static_cast<double>(J) * J * J);
    const int N = I * J;
    std::vector<double> evals;
    evals.reserve(N);

    // Only block offsets 0, 1 and I-1 carry nonzero entries (nearest-neighbor
    // stencils on both grids).
    std::vector<int> offsets{0, 1};
    if (I - 1 != 1) offsets.push_back(I - 1);

    for (int m = 0; m < I; ++m) {
        const double theta = kTwoPi * m / I;
        std::vector<double> A(static_cast<size_t>(J) * J, 0.0);   // real part
        std::vector<double> Bm(static_cast<size_t>(J) * J, 0.0);  // imaginary part
        for (int l : offsets) {
            const double cre = std::cos(theta * l), cim = -std::sin(theta * l);
            const double corr = cJ3 * circ2(l, I);
            for (int a = 0; a < J; ++a)
                for (int b = 0; b < J; ++b) {
                    double v = -corr;
                    const int d = l * J + (b - a);
                    if (std::abs(d) <= 1 || std::abs(d - N) <= 1 || std::abs(d + N) <= 1)
                        v += circ2(d, N);
                    if (v != 0.0) {
                        A[static_cast<size_t>(a) * J + b] += v * cre;
                        Bm[static_cast<size_t>(a) * J + b] += v * cim;
                    }
                }
        }
        // Real embedding [[A, -B], [B, A]].
        const int n2 = 2 * J;
        std::vector<double> M(static_cast<size_t>(n2) * n2, 0.0);
        for (int a = 0; a < J; ++a)
            for (int b = 0; b < J; ++b) {
                const double av = A[static_cast<size_t>(a) * J + b];
                const double bv = Bm[static_cast<size_t>(a) * J + b];
                M[static_cast<size_t>(a) * n2 + b] = av;
                M[static_cast<size_t>(a) * n2 + (J + b)] = -bv;
                M[static_cast<size_t>(J + a) * n2 + b] = bv;
                M[static_cast<size_t>(J + a) * n2 + (J + b)] = av;
            }
        auto vals = symm_eigenvalues(M, n2);  // each eigenvalue appears twice
        std::sort(vals.begin(), vals.end());
        for (int i = 0; i < n2; i += 2) evals.push_back(0.5 * (vals[i] + vals[i + 1]));
    }

    std::sort(evals.begin(), evals.end(), std::greater<double>());
    return DissipationEigen{evals[0], evals[1]};
}

}  // namespace spclosure
