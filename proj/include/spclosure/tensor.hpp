#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spclosure {

/// Dense row-major (channels x length) buffer of doubles. Plain vectors are
/// ch == 1; scalars are ch == 1, n == 1.
struct Tensor {
    int ch = 1;
    int n = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int channels, int length, double fill = 0.0)
        : ch(channels), n(length), v(static_cast<size_t>(channels) * length, fill) {}
    explicit Tensor(std::vector<double> data)
        : ch(1), n(static_cast<int>(data.size())), v(std::move(data)) {}

    int size() const { return ch * n; }
    double& at(int c, int i) { return v[static_cast<size_t>(c) * n + i]; }
    double at(int c, int i) const { return v[static_cast<size_t>(c) * n + i]; }
    double* row(int c) { return v.data() + static_cast<size_t>(c) * n; }
    const double* row(int c) const { return v.data() + static_cast<size_t>(c) * n; }

    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

inline double sum(const std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e;
    return s;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "dot: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2_sq(const std::vector<double>& x) { return dot(x, x); }

inline double max_abs(const std::vector<double>& x) {
    double m = 0.0;
    for (double e : x) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace spclosure
