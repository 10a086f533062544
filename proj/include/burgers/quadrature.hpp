#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace burgers::quad {

struct Rule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

inline const Rule& gl8() {
    static const Rule r = gauss_legendre(8);
    return r;
}

// Nodes/weights of a rule mapped to [a, b].
inline std::vector<std::pair<double, double>> mapped(const Rule& r, double a, double b) {
    std::vector<std::pair<double, double>> out(r.x.size());
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.x.size(); ++i) out[i] = {c + s * r.x[i], s * r.w[i]};
    return out;
}

}  // namespace burgers::quad
