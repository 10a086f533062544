#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>

#include "fields.hpp"

namespace burgers::fd {

// Fourth-order first derivative along a strided line. Central in the interior,
// one-sided (still fourth order) on the two outermost points at each end.
// Lines shorter than five points fall back to second order; a single point
// has zero derivative.
inline void diff_line(const double* f, double* out, int n, std::ptrdiff_t s, double h) {
    auto F = [&](int i) { return f[i * s]; };
    if (n == 1) { out[0] = 0.0; return; }
    if (n < 5) {
        for (int i = 0; i < n; ++i) {
            if (i == 0) out[0] = (F(1) - F(0)) / h;
            else if (i == n - 1) out[i * s] = (F(i) - F(i - 1)) / h;
            else out[i * s] = (F(i + 1) - F(i - 1)) / (2 * h);
        }
        return;
    }
    const double c = 1.0 / (12.0 * h);
    out[0] = c * (-25 * F(0) + 48 * F(1) - 36 * F(2) + 16 * F(3) - 3 * F(4));
    out[s] = c * (-3 * F(0) - 10 * F(1) + 18 * F(2) - 6 * F(3) + F(4));
    for (int i = 2; i < n - 2; ++i) out[i * s] = c * (F(i - 2) - 8 * F(i - 1) + 8 * F(i + 1) - F(i + 2));
    const int a = n - 1, b = n - 2;
    out[a * s] = -c * (-25 * F(a) + 48 * F(a - 1) - 36 * F(a - 2) + 16 * F(a - 3) - 3 * F(a - 4));
    out[b * s] = -c * (-3 * F(a) - 10 * F(a - 1) + 18 * F(a - 2) - 6 * F(a - 3) + F(a - 4));
}

// diff_line applied to m contiguous lanes at once: point i of lane l is f[i*s + l].
inline void diff_lanes(const double* f, double* out, int n, std::ptrdiff_t s, int m, double h) {
    if (n < 5) {
        for (int l = 0; l < m; ++l) diff_line(f + l, out + l, n, s, h);
        return;
    }
    const double c = 1.0 / (12.0 * h);
    auto row = [&](int i) { return f + i * s; };
    auto comb = [&](int o, std::initializer_list<std::pair<int, double>> terms) {
        double* d = out + o * s;
        for (int l = 0; l < m; ++l) d[l] = 0.0;
        for (auto [i, w] : terms) {
            const double* r = row(i);
            const double a = c * w;
            for (int l = 0; l < m; ++l) d[l] += a * r[l];
        }
    };
    comb(0, {{0, -25}, {1, 48}, {2, -36}, {3, 16}, {4, -3}});
    comb(1, {{0, -3}, {1, -10}, {2, 18}, {3, -6}, {4, 1}});
    for (int i = 2; i < n - 2; ++i) {
        const double *a = row(i - 2), *b = row(i - 1), *d = row(i + 1), *e = row(i + 2);
        double* o = out + i * s;
        for (int l = 0; l < m; ++l) o[l] = c * ((a[l] - e[l]) + 8.0 * (d[l] - b[l]));
    }
    const int a = n - 1;
    comb(a, {{a, 25}, {a - 1, -48}, {a - 2, 36}, {a - 3, -16}, {a - 4, 3}});
    comb(a - 1, {{a, 3}, {a - 1, 10}, {a - 2, -18}, {a - 3, 6}, {a - 4, -1}});
}

// Fourth-order second derivative, central in the interior and one-sided
// five-point stencils near the ends.
inline void diff2_line(const double* f, double* out, int n, std::ptrdiff_t s, double h) {
    auto F = [&](int i) { return f[i * s]; };
    if (n < 6) {
        for (int i = 0; i < n; ++i) {
            if (n < 3) { out[i * s] = 0.0; continue; }
            int j = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
            out[i * s] = (F(j - 1) - 2 * F(j) + F(j + 1)) / (h * h);
        }
        return;
    }
    const double c = 1.0 / (12.0 * h * h);
    out[0] = c * (45 * F(0) - 154 * F(1) + 214 * F(2) - 156 * F(3) + 61 * F(4) - 10 * F(5));
    out[s] = c * (10 * F(0) - 15 * F(1) - 4 * F(2) + 14 * F(3) - 6 * F(4) + F(5));
    for (int i = 2; i < n - 2; ++i)
        out[i * s] = c * (-F(i - 2) + 16 * F(i - 1) - 30 * F(i) + 16 * F(i + 1) - F(i + 2));
    const int a = n - 1;
    out[a * s] = c * (45 * F(a) - 154 * F(a - 1) + 214 * F(a - 2) - 156 * F(a - 3) + 61 * F(a - 4) - 10 * F(a - 5));
    out[(a - 1) * s] = c * (10 * F(a) - 15 * F(a - 1) - 4 * F(a - 2) + 14 * F(a - 3) - 6 * F(a - 4) + F(a - 5));
}

// Derivatives of a row-major N x N block (axis 1 = rows, axis 2 = columns).
inline void d_perp(const double* f, double* out, int N, double h, int axis) {
    if (axis == 1)
        diff_lanes(f, out, N, N, N, h);
    else
        for (int i = 0; i < N; ++i) diff_line(f + std::size_t(i) * N, out + std::size_t(i) * N, N, 1, h);
}

inline Field2D d1(const Field2D& f) {
    Field2D r(f.grid());
    d_perp(f.data(), r.data(), f.N(), f.grid().h(), 1);
    return r;
}
inline Field2D d2(const Field2D& f) {
    Field2D r(f.grid());
    d_perp(f.data(), r.data(), f.N(), f.grid().h(), 2);
    return r;
}
inline Field2D d11(const Field2D& f) {
    Field2D r(f.grid());
    for (int j = 0; j < f.N(); ++j) diff2_line(f.data() + j, r.data() + j, f.N(), f.N(), f.grid().h());
    return r;
}
inline Field2D d22(const Field2D& f) {
    Field2D r(f.grid());
    for (int i = 0; i < f.N(); ++i)
        diff2_line(f.data() + std::size_t(i) * f.N(), r.data() + std::size_t(i) * f.N(), f.N(), 1, f.grid().h());
    return r;
}

// axis in {1,2,3}
inline SlicedField3D d(const SlicedField3D& f, int axis) {
    SlicedField3D r(f.grid());
    const auto& g = f.grid();
    const int N = g.perp.N;
    if (axis == 3) {
        diff_lanes(f.data(), r.data(), g.N3, std::ptrdiff_t(g.perp.size()), int(g.perp.size()), g.h3());
    } else {
        for (int k = 0; k < g.N3; ++k) d_perp(f.slice_data(k), r.slice_data(k), N, g.perp.h(), axis);
    }
    return r;
}

// 1D profile helpers
inline std::vector<double> d_line(const std::vector<double>& f, double h) {
    std::vector<double> r(f.size());
    if (!f.empty()) diff_line(f.data(), r.data(), int(f.size()), 1, h);
    return r;
}

}  // namespace burgers::fd
