#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace burgers {

struct Grid2D {
    double L = 12.0;
    int N = 128;

    Grid2D() = default;
    Grid2D(double half_width, int points) : L(half_width), N(points) {
        if (!(L > 0.0) || !std::isfinite(L))
            throw std::invalid_argument("Grid2D: half-width must be positive");
        if (N < 16 || N % 2 != 0)
            throw std::invalid_argument("Grid2D: N must be even and >= 16");
    }
    double h() const { return 2.0 * L / N; }
    double x(int i) const { return -L + (i + 0.5) * h(); }
    std::size_t size() const { return std::size_t(N) * N; }
    bool operator==(const Grid2D&) const = default;
};

// Axial grid uses the same cell-centered convention; a single slice is allowed
// (x3-independent data).
struct Grid3D {
    Grid2D perp;
    double L3 = 8.0;
    int N3 = 64;

    Grid3D() = default;
    Grid3D(Grid2D p, double half_width3, int points3) : perp(p), L3(half_width3), N3(points3) {
        if (!(L3 > 0.0) || !std::isfinite(L3))
            throw std::invalid_argument("Grid3D: axial half-width must be positive");
        if (N3 < 1)
            throw std::invalid_argument("Grid3D: N3 must be positive");
    }
    double h3() const { return 2.0 * L3 / N3; }
    double x3(int k) const { return -L3 + (k + 0.5) * h3(); }
    std::size_t size() const { return perp.size() * std::size_t(N3); }
    bool operator==(const Grid3D&) const = default;
};

struct WeightParams {
    double m = 2.0;
    double p = 2.0;
};

inline double weight_b(double x1, double x2) {
    return std::sqrt(1.0 + x1 * x1) * std::sqrt(1.0 + x2 * x2);
}

namespace detail {
inline void require_finite(const std::vector<double>& v, const char* who) {
    for (double a : v)
        if (!std::isfinite(a)) throw std::invalid_argument(std::string(who) + ": non-finite value");
}

// (1+x_i^2)^{e/2} on the grid nodes; b^e is the outer product of this with itself.
inline std::vector<double> axis_weight(const Grid2D& g, double e) {
    std::vector<double> w(g.N);
    for (int i = 0; i < g.N; ++i) w[i] = std::pow(1.0 + g.x(i) * g.x(i), 0.5 * e);
    return w;
}
}  // namespace detail

// Row-major: index i1*N + i2, i1 along x1.
class Field2D {
public:
    Field2D() = default;
    explicit Field2D(const Grid2D& g) : grid_(g), v_(g.size(), 0.0) {}
    Field2D(const Grid2D& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
        if (v_.size() != g.size()) throw std::invalid_argument("Field2D: size mismatch");
        detail::require_finite(v_, "Field2D");
    }
    template <class F>
    static Field2D sample(const Grid2D& g, F&& f) {
        Field2D r(g);
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j) r(i, j) = f(g.x(i), g.x(j));
        detail::require_finite(r.v_, "Field2D::sample");
        return r;
    }

    const Grid2D& grid() const { return grid_; }
    int N() const { return grid_.N; }
    double& operator()(int i, int j) { return v_[std::size_t(i) * grid_.N + j]; }
    double operator()(int i, int j) const { return v_[std::size_t(i) * grid_.N + j]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    Field2D& operator+=(const Field2D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k]; return *this; }
    Field2D& operator-=(const Field2D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k]; return *this; }
    Field2D& operator*=(double s) { for (double& a : v_) a *= s; return *this; }
    Field2D& axpy(double a, const Field2D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += a * o.v_[k]; return *this; }

private:
    void check(const Field2D& o) const {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("Field2D: grid mismatch");
    }
    Grid2D grid_;
    std::vector<double> v_;
};

inline Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
inline Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
inline Field2D operator*(double s, Field2D a) { return a *= s; }

// Slices are stored contiguously, slice k at offset k*N*N.
class SlicedField3D {
public:
    SlicedField3D() = default;
    explicit SlicedField3D(const Grid3D& g) : grid_(g), v_(g.size(), 0.0) {}
    SlicedField3D(const Grid3D& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
        if (v_.size() != g.size()) throw std::invalid_argument("SlicedField3D: size mismatch");
        detail::require_finite(v_, "SlicedField3D");
    }
    SlicedField3D(const Grid3D& g, const std::vector<Field2D>& slices) : grid_(g), v_(g.size()) {
        if (slices.empty()) throw std::invalid_argument("SlicedField3D: empty slice list");
        if (int(slices.size()) != g.N3) throw std::invalid_argument("SlicedField3D: slice count mismatch");
        for (int k = 0; k < g.N3; ++k) {
            if (!(slices[k].grid() == g.perp)) throw std::invalid_argument("SlicedField3D: slice grid mismatch");
            std::copy(slices[k].values().begin(), slices[k].values().end(), v_.begin() + offset(k));
        }
    }
    // f(x3) * g(x_perp)
    static SlicedField3D outer(const Grid3D& g, const std::vector<double>& axial, const Field2D& perp) {
        if (int(axial.size()) != g.N3 || !(perp.grid() == g.perp))
            throw std::invalid_argument("SlicedField3D::outer: shape mismatch");
        SlicedField3D r(g);
        for (int k = 0; k < g.N3; ++k) {
            double* s = r.slice_data(k);
            for (std::size_t q = 0; q < g.perp.size(); ++q) s[q] = axial[k] * perp.data()[q];
        }
        detail::require_finite(r.v_, "SlicedField3D::outer");
        return r;
    }

    const Grid3D& grid() const { return grid_; }
    int N3() const { return grid_.N3; }
    std::size_t offset(int k) const { return std::size_t(k) * grid_.perp.size(); }
    double* slice_data(int k) { return v_.data() + offset(k); }
    const double* slice_data(int k) const { return v_.data() + offset(k); }
    Field2D slice(int k) const {
        return Field2D(grid_.perp, std::vector<double>(v_.begin() + offset(k), v_.begin() + offset(k + 1)));
    }
    void set_slice(int k, const Field2D& f) {
        if (!(f.grid() == grid_.perp)) throw std::invalid_argument("set_slice: grid mismatch");
        std::copy(f.values().begin(), f.values().end(), v_.begin() + offset(k));
    }
    double& operator()(int k, int i, int j) { return v_[offset(k) + std::size_t(i) * grid_.perp.N + j]; }
    double operator()(int k, int i, int j) const { return v_[offset(k) + std::size_t(i) * grid_.perp.N + j]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    SlicedField3D& operator+=(const SlicedField3D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k]; return *this; }
    SlicedField3D& operator-=(const SlicedField3D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k]; return *this; }
    SlicedField3D& operator*=(double s) { for (double& a : v_) a *= s; return *this; }
    SlicedField3D& axpy(double a, const SlicedField3D& o) { check(o); for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += a * o.v_[k]; return *this; }

private:
    void check(const SlicedField3D& o) const {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("SlicedField3D: grid mismatch");
    }
    Grid3D grid_;
    std::vector<double> v_;
};

inline SlicedField3D operator+(SlicedField3D a, const SlicedField3D& b) { return a += b; }
inline SlicedField3D operator-(SlicedField3D a, const SlicedField3D& b) { return a -= b; }
inline SlicedField3D operator*(double s, SlicedField3D a) { return a *= s; }

using Triple = std::array<SlicedField3D, 3>;

// ---- norms and integrals -------------------------------------------------

namespace detail {
inline double l2m_raw(const Grid2D& g, const double* f, double m) {
    auto w = axis_weight(g, 2.0 * m);
    double s = 0.0;
    for (int i = 0; i < g.N; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.N; ++j) {
            double a = f[std::size_t(i) * g.N + j];
            row += w[j] * a * a;
        }
        s += w[i] * row;
    }
    return std::sqrt(s) * g.h();
}
inline void require_finite_ptr(const double* f, std::size_t n, const char* who) {
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(f[k])) throw std::invalid_argument(std::string(who) + ": non-finite value");
}
}  // namespace detail

inline double norm_L2m(const Field2D& f, double m) {
    if (!(m >= 0.0)) throw std::invalid_argument("norm_L2m: m must be >= 0");
    detail::require_finite(f.values(), "norm_L2m");
    return detail::l2m_raw(f.grid(), f.data(), m);
}

inline double norm_Lpm(const Field2D& f, double m, double p) {
    if (!(m >= 0.0)) throw std::invalid_argument("norm_Lpm: m must be >= 0");
    if (!(p >= 1.0)) throw std::invalid_argument("norm_Lpm: p must be >= 1");
    detail::require_finite(f.values(), "norm_Lpm");
    const Grid2D& g = f.grid();
    auto w = detail::axis_weight(g, m);
    if (std::isinf(p)) {
        double mx = 0.0;
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j) mx = std::max(mx, std::abs(w[i] * w[j] * f(i, j)));
        return mx;
    }
    if (p == 2.0) return detail::l2m_raw(g, f.data(), m);
    double s = 0.0;
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) s += std::pow(std::abs(w[i] * w[j] * f(i, j)), p);
    return std::pow(s * g.h() * g.h(), 1.0 / p);
}

inline double slice_norm_L2m(const SlicedField3D& w, int k, double m) {
    return detail::l2m_raw(w.grid().perp, w.slice_data(k), m);
}

inline double norm_X2m(const SlicedField3D& w, double m) {
    if (!(m >= 0.0)) throw std::invalid_argument("norm_X2m: m must be >= 0");
    if (w.N3() < 1 || w.values().empty()) throw std::invalid_argument("norm_X2m: empty slice list");
    detail::require_finite(w.values(), "norm_X2m");
    double mx = 0.0;
    for (int k = 0; k < w.N3(); ++k) mx = std::max(mx, slice_norm_L2m(w, k, m));
    return mx;
}

// Max over slices whose x3 lies in [a, b].
inline double norm_X2m_on(const SlicedField3D& w, double m, double a, double b) {
    double mx = 0.0;
    for (int k = 0; k < w.N3(); ++k) {
        double z = w.grid().x3(k);
        if (z >= a && z <= b) mx = std::max(mx, slice_norm_L2m(w, k, m));
    }
    return mx;
}

inline double transverse_integral(const Grid2D& g, const double* f) {
    double s = 0.0;
    for (int i = 0; i < g.N; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.N; ++j) row += f[std::size_t(i) * g.N + j];
        s += row;
    }
    return s * g.h() * g.h();
}

inline double transverse_integral(const Field2D& f) { return transverse_integral(f.grid(), f.data()); }

inline std::vector<double> slice_integrals(const SlicedField3D& w) {
    std::vector<double> r(w.N3());
    for (int k = 0; k < w.N3(); ++k) r[k] = transverse_integral(w.grid().perp, w.slice_data(k));
    return r;
}

inline Field2D project_zero_mean(const Field2D& f, const Field2D& profile) {
    double mp = transverse_integral(profile);
    if (std::abs(mp) < 1e-300 || !std::isfinite(mp))
        throw std::invalid_argument("project_zero_mean: profile has zero integral");
    Field2D r = f;
    r.axpy(-transverse_integral(f) / mp, profile);
    return r;
}

inline void project_zero_mean_slices(SlicedField3D& w, const Field2D& profile) {
    double mp = transverse_integral(profile);
    if (std::abs(mp) < 1e-300) throw std::invalid_argument("project_zero_mean: profile has zero integral");
    const std::size_t n = profile.grid().size();
    for (int k = 0; k < w.N3(); ++k) {
        double* s = w.slice_data(k);
        double c = transverse_integral(w.grid().perp, s) / mp;
        for (std::size_t q = 0; q < n; ++q) s[q] -= c * profile.data()[q];
    }
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

}  // namespace burgers
