#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fd.hpp"
#include "fields.hpp"
#include "quadrature.hpp"

namespace burgers {

struct AlphaPair {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    AlphaPair() = default;
    AlphaPair(double a1, double a2) : alpha1(a1), alpha2(a2) {
        if (!(a2 > 0.0) || !(a1 >= a2)) throw std::invalid_argument("AlphaPair: need alpha1 >= alpha2 > 0");
    }
    static AlphaPair from_lambda(double lambda) {
        if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0,1)");
        return {1.0 + lambda, 1.0 - lambda};
    }
};

inline double sg_a(double alpha, double t) { return -std::expm1(-alpha * t) / alpha; }
inline double sg_c(double t) { return -std::expm1(-2.0 * t); }

enum class Boundary { Zero, Clamp };

// Discrete 1D propagator: out_i = sum_j M(i,j) f_j over the band [lo_i, hi_i].
struct Propagator1D {
    int n = 0;
    Eigen::MatrixXd M;
    std::vector<int> lo, hi;
    std::vector<double> band;        // row i: M(i, lo[i]..hi[i]) stored contiguously
    std::vector<std::size_t> start;  // offset of row i in band
    double fill = 0.0;               // fraction of nonzero entries

    const double* row(int i) const { return band.data() + start[i]; }
    void apply(const double* f, std::ptrdiff_t fs, double* out, std::ptrdiff_t os) const {
        for (int i = 0; i < n; ++i) {
            const double* r = row(i) - lo[i];
            double s = 0.0;
            for (int j = lo[i]; j <= hi[i]; ++j) s += r[j] * f[j * fs];
            out[i * os] = s;
        }
    }
    std::vector<double> apply(const std::vector<double>& f) const {
        if (int(f.size()) != n) throw std::invalid_argument("Propagator1D: size mismatch");
        std::vector<double> out(n);
        apply(f.data(), 1, out.data(), 1);
        return out;
    }
};

namespace detail {

// Kernel k(z) = P exp(-(z - kappa x)^2 / (2 sigma^2)) integrated against the
// Catmull-Rom interpolant of grid data (nodes x_j = -L + (j+1/2)h). With
// derivative = true the kernel is replaced by -dk/dz, giving the propagator
// applied to the derivative of the data.
struct KernelSpec {
    double kappa, sigma, P;
    bool derivative;
};

inline Propagator1D build_propagator(int n, double L, const KernelSpec& ks, Boundary bnd) {
    const double h = 2.0 * L / n;
    auto node = [&](int j) { return -L + (j + 0.5) * h; };
    Propagator1D pr;
    pr.n = n;
    pr.M = Eigen::MatrixXd::Zero(n, n);
    pr.lo.assign(n, n);
    pr.hi.assign(n, -1);
    const auto& gl = quad::gl8();
    const double s2 = ks.sigma * ks.sigma;

    auto kern = [&](double z, double c) {
        double d = z - c;
        double e = ks.P * std::exp(-0.5 * d * d / s2);
        return ks.derivative ? e * d / s2 : e;
    };
    auto add = [&](int i, int j, double v) {
        if (bnd == Boundary::Zero) {
            if (j < 0 || j >= n) return;
        } else {
            j = std::clamp(j, 0, n - 1);
        }
        pr.M(i, j) += v;
    };

    for (int i = 0; i < n; ++i) {
        const double c = ks.kappa * node(i);
        const double wa = c - 8.0 * ks.sigma, wb = c + 8.0 * ks.sigma;
        int jfirst, jlast;  // intervals [z_j, z_{j+1}]
        if (bnd == Boundary::Zero) { jfirst = -2; jlast = n; }
        else { jfirst = 0; jlast = n - 2; }
        int ja = int(std::floor((wa - node(0)) / h)) - 1;
        int jb = int(std::floor((wb - node(0)) / h)) + 1;
        ja = std::max(ja, jfirst);
        jb = std::min(jb, jlast);
        for (int j = ja; j <= jb; ++j) {
            const double z0 = node(j), z1 = node(j + 1);
            const double a = std::max(z0, wa), b = std::min(z1, wb);
            if (!(b > a)) continue;
            const int pieces = std::max(1, int(std::ceil((b - a) / ks.sigma)));
            const double len = (b - a) / pieces;
            double acc[4] = {0, 0, 0, 0};
            for (int p = 0; p < pieces; ++p) {
                const double pa = a + p * len;
                const double mid = pa + 0.5 * len, half = 0.5 * len;
                for (std::size_t q = 0; q < gl.x.size(); ++q) {
                    const double z = mid + half * gl.x[q];
                    const double wq = half * gl.w[q] * kern(z, c);
                    const double u = (z - z0) / h, u2 = u * u, u3 = u2 * u;
                    acc[0] += wq * 0.5 * (-u3 + 2 * u2 - u);
                    acc[1] += wq * 0.5 * (3 * u3 - 5 * u2 + 2);
                    acc[2] += wq * 0.5 * (-3 * u3 + 4 * u2 + u);
                    acc[3] += wq * 0.5 * (u3 - u2);
                }
            }
            for (int q = 0; q < 4; ++q) add(i, j - 1 + q, acc[q]);
        }
        if (bnd == Boundary::Clamp) {
            // constant extension beyond the end nodes
            const double t0 = (node(0) - c) / ks.sigma, t1 = (node(n - 1) - c) / ks.sigma;
            if (ks.derivative) {
                const double f = ks.P;
                pr.M(i, 0) += -f * std::exp(-0.5 * t0 * t0);
                pr.M(i, n - 1) += f * std::exp(-0.5 * t1 * t1);
            } else {
                const double f = ks.P * ks.sigma * std::sqrt(std::numbers::pi / 2.0);
                pr.M(i, 0) += f * std::erfc(-t0 / std::numbers::sqrt2);
                pr.M(i, n - 1) += f * std::erfc(t1 / std::numbers::sqrt2);
            }
        }
    }
    // Discrete conservation: unit column sums (mass) for the transverse kernel,
    // unit row sums (constants) for the clamped axial kernel.
    if (!ks.derivative) {
        if (bnd == Boundary::Zero) {
            for (int j = 0; j < n; ++j) {
                const double s = pr.M.col(j).sum();
                if (s > 0.0) pr.M.col(j) /= s;
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const double s = pr.M.row(i).sum();
                if (s > 0.0) pr.M.row(i) /= s;
            }
        }
    }
    std::size_t nnz = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (pr.M(i, j) != 0.0) { pr.lo[i] = std::min(pr.lo[i], j); pr.hi[i] = std::max(pr.hi[i], j); }
        if (pr.hi[i] < pr.lo[i]) { pr.lo[i] = 0; pr.hi[i] = -1; }
        nnz += std::size_t(std::max(0, pr.hi[i] - pr.lo[i] + 1));
    }
    pr.fill = double(nnz) / (double(n) * n);
    pr.start.resize(n);
    pr.band.reserve(nnz);
    for (int i = 0; i < n; ++i) {
        pr.start[i] = pr.band.size();
        for (int j = pr.lo[i]; j <= pr.hi[i]; ++j) pr.band.push_back(pr.M(i, j));
    }
    return pr;
}

inline KernelSpec fp_kernel(double alpha, double t, bool derivative) {
    const double a = sg_a(alpha, t);
    const double e = std::exp(0.5 * alpha * t);
    return {e, std::sqrt(2.0 * a) * e, 1.0 / std::sqrt(4.0 * std::numbers::pi * a), derivative};
}

inline KernelSpec axial_kernel(double t, bool derivative) {
    const double c = sg_c(t);
    return {std::exp(-t), std::sqrt(c), 1.0 / std::sqrt(2.0 * std::numbers::pi * c), derivative};
}

class PropagatorCache {
public:
    using Key = std::tuple<int, int, double, double, double, int, int>;
    std::shared_ptr<const Propagator1D> get(int kind, int n, double L, double alpha, double t, bool deriv, Boundary b) {
        Key k{kind, n, L, alpha, t, deriv ? 1 : 0, b == Boundary::Zero ? 0 : 1};
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(k);
        if (it != map_.end()) return it->second;
        KernelSpec ks = kind == 0 ? fp_kernel(alpha, t, deriv) : axial_kernel(t, deriv);
        auto p = std::make_shared<const Propagator1D>(build_propagator(n, L, ks, b));
        if (map_.size() > 4096) map_.clear();
        map_[k] = p;
        return p;
    }
    static PropagatorCache& instance() {
        static PropagatorCache c;
        return c;
    }

private:
    std::mutex mu_;
    std::map<Key, std::shared_ptr<const Propagator1D>> map_;
};

inline void check_time(double t, const char* who) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument(std::string(who) + ": t must be > 0");
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// out = A * F * B^T for an N x N row-major block F.
inline void apply_tensor(const Propagator1D& A, const Propagator1D& B, const double* F, double* out, int N,
                         std::vector<double>& tmp) {
    tmp.assign(std::size_t(N) * N, 0.0);
    if (A.fill > 0.35 || B.fill > 0.35) {
        Eigen::Map<const RowMat> Fm(F, N, N);
        Eigen::Map<RowMat> Om(out, N, N);
        Om.noalias() = A.M * Fm * B.M.transpose();
        return;
    }
    // tmp = A * F (row combinations)
    for (int i = 0; i < N; ++i) {
        double* ti = tmp.data() + std::size_t(i) * N;
        const double* ar = A.row(i) - A.lo[i];
        for (int j = A.lo[i]; j <= A.hi[i]; ++j) {
            const double a = ar[j];
            const double* fj = F + std::size_t(j) * N;
            for (int q = 0; q < N; ++q) ti[q] += a * fj[q];
        }
    }
    // out = tmp * B^T
    for (int r = 0; r < N; ++r) {
        const double* tr = tmp.data() + std::size_t(r) * N;
        double* orow = out + std::size_t(r) * N;
        for (int i = 0; i < N; ++i) {
            const double* br = B.row(i) - B.lo[i];
            double s = 0.0;
            for (int j = B.lo[i]; j <= B.hi[i]; ++j) s += br[j] * tr[j];
            orow[i] = s;
        }
    }
}

}  // namespace detail

// Propagator of the 1D Fokker-Planck operator d^2 + (alpha/2) x d + alpha/2
// on a cell-centered axis of half-width L with n points (zero extension).
inline std::shared_ptr<const Propagator1D> fp_propagator(int n, double L, double alpha, double t, bool derivative = false) {
    detail::check_time(t, "fp_propagator");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    return detail::PropagatorCache::instance().get(0, n, L, alpha, t, derivative, Boundary::Zero);
}

// Axial propagator f -> (G_t * f)(x e^{-t}) with clamped extension.
inline std::shared_ptr<const Propagator1D> axial_propagator(int n, double L, double t, bool derivative = false) {
    detail::check_time(t, "axial_propagator");
    return detail::PropagatorCache::instance().get(1, n, L, 0.0, t, derivative, Boundary::Clamp);
}

// 1D profile sampled on the cell-centered axis [-L, L] with n points.
inline std::vector<double> apply_sg_1d(double alpha, double t, const std::vector<double>& f, double L) {
    if (t == 0.0) return f;
    if (!(alpha > 0.0)) throw std::invalid_argument("apply_sg_1d: alpha must be positive");
    detail::check_time(t, "apply_sg_1d");
    detail::require_finite(f, "apply_sg_1d");
    return fp_propagator(int(f.size()), L, alpha, t)->apply(f);
}

// Unit-mass Gaussian left invariant by the 2D semigroup.
inline Field2D invariant_profile(const AlphaPair& ap, const Grid2D& g) {
    const double c = std::sqrt(ap.alpha1 * ap.alpha2) / (4.0 * std::numbers::pi);
    return Field2D::sample(g, [&](double x1, double x2) {
        return c * std::exp(-(ap.alpha1 * x1 * x1 + ap.alpha2 * x2 * x2) / 4.0);
    });
}

inline Field2D apply_sg_2d(const AlphaPair& ap, double t, const Field2D& f) {
    if (t == 0.0) return f;
    detail::check_time(t, "apply_sg_2d");
    const Grid2D& g = f.grid();
    auto A1 = fp_propagator(g.N, g.L, ap.alpha1, t);
    auto A2 = fp_propagator(g.N, g.L, ap.alpha2, t);
    Field2D out(g);
    std::vector<double> tmp;
    detail::apply_tensor(*A1, *A2, f.data(), out.data(), g.N, tmp);
    return out;
}

// e^{tL}(d1 g1 + d2 g2) with the derivatives carried by the kernel.
inline Field2D apply_sg_2d_div(const AlphaPair& ap, double t, const Field2D& g1, const Field2D& g2) {
    detail::check_time(t, "apply_sg_2d_div");
    if (!(g1.grid() == g2.grid())) throw std::invalid_argument("apply_sg_2d_div: grid mismatch");
    const Grid2D& g = g1.grid();
    auto A1 = fp_propagator(g.N, g.L, ap.alpha1, t);
    auto A2 = fp_propagator(g.N, g.L, ap.alpha2, t);
    auto D1 = fp_propagator(g.N, g.L, ap.alpha1, t, true);
    auto D2 = fp_propagator(g.N, g.L, ap.alpha2, t, true);
    Field2D out(g), part(g);
    std::vector<double> tmp;
    detail::apply_tensor(*D1, *A2, g1.data(), out.data(), g.N, tmp);
    detail::apply_tensor(*A1, *D2, g2.data(), part.data(), g.N, tmp);
    out += part;
    return project_zero_mean(out, invariant_profile(ap, g));
}

// ---- Laplace-formula resolvent -------------------------------------------

struct ResolventNode {
    double t, w;
};

// Quadrature for -int_0^inf T(t) dt: graded panels on [0,1], then
// Gauss-Legendre in u = exp(-mu t) up to the 1e-12 truncation time.
inline std::vector<ResolventNode> resolvent_nodes(const AlphaPair& ap) {
    std::vector<ResolventNode> nodes;
    const auto g4 = quad::gauss_legendre(4);
    const int K = 6;
    double a = 0.0;
    for (int k = K; k >= 0; --k) {
        double b = std::ldexp(1.0, -k);
        for (auto [x, w] : quad::mapped(g4, a, b)) nodes.push_back({x, w});
        a = b;
    }
    const double mu = 0.5 * ap.alpha2;
    const double T = std::log(1e12) / mu;
    const auto g32 = quad::gauss_legendre(32);
    for (auto [u, w] : quad::mapped(g32, std::exp(-mu * T), std::exp(-mu * 1.0)))
        nodes.push_back({-std::log(u) / mu, w / (mu * u)});
    return nodes;
}

enum class ResolventMode { Plain, Div };

struct ResolventResult {
    Field2D value;
    double residual = 0.0;  // relative L2(m) residual of the discrete operator identity
};

// Discrete (L_perp + lambda M) = Delta + (a1/2) x1 d1 + (a2/2) x2 d2 + (a1+a2)/2.
inline Field2D apply_generator(const AlphaPair& ap, const Field2D& f) {
    const Grid2D& g = f.grid();
    Field2D r = fd::d11(f) + fd::d22(f);
    Field2D f1 = fd::d1(f), f2 = fd::d2(f);
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j)
            r(i, j) += 0.5 * ap.alpha1 * g.x(i) * f1(i, j) + 0.5 * ap.alpha2 * g.x(j) * f2(i, j) +
                       0.5 * (ap.alpha1 + ap.alpha2) * f(i, j);
    return r;
}

inline ResolventResult resolvent_apply(const AlphaPair& ap, const Field2D& rhs, double m = 2.0,
                                       double mean_tol = 1e-10) {
    const Grid2D& g = rhs.grid();
    double l1 = 0.0;
    for (double v : rhs.values()) l1 += std::abs(v);
    l1 *= g.h() * g.h();
    const double mean = transverse_integral(rhs);
    if (std::abs(mean) > mean_tol * l1 + 1e-300)
        throw std::domain_error("resolvent_apply: right-hand side is not mean-free");
    const Field2D prof = invariant_profile(ap, g);
    Field2D f = project_zero_mean(rhs, prof);
    Field2D acc(g);
    std::vector<double> tmp;
    Field2D part(g);
    for (const auto& nd : resolvent_nodes(ap)) {
        auto A1 = fp_propagator(g.N, g.L, ap.alpha1, nd.t);
        auto A2 = fp_propagator(g.N, g.L, ap.alpha2, nd.t);
        detail::apply_tensor(*A1, *A2, f.data(), part.data(), g.N, tmp);
        acc.axpy(-nd.w, part);
    }
    acc = project_zero_mean(acc, prof);
    ResolventResult r{acc, 0.0};
    Field2D res = apply_generator(ap, acc) - f;
    double nf = norm_L2m(f, m);
    r.residual = nf > 0 ? norm_L2m(res, m) / nf : norm_L2m(res, m);
    return r;
}

// (L_perp + lambda M)^{-1} (d1 g1 + d2 g2); p only labels the source space.
inline ResolventResult resolvent_apply_div(const AlphaPair& ap, const Field2D& g1, const Field2D& g2, double m = 2.0) {
    if (!(g1.grid() == g2.grid())) throw std::invalid_argument("resolvent_apply_div: grid mismatch");
    const Grid2D& g = g1.grid();
    const Field2D prof = invariant_profile(ap, g);
    Field2D acc(g), part(g), part2(g);
    std::vector<double> tmp;
    for (const auto& nd : resolvent_nodes(ap)) {
        auto A1 = fp_propagator(g.N, g.L, ap.alpha1, nd.t);
        auto A2 = fp_propagator(g.N, g.L, ap.alpha2, nd.t);
        auto D1 = fp_propagator(g.N, g.L, ap.alpha1, nd.t, true);
        auto D2 = fp_propagator(g.N, g.L, ap.alpha2, nd.t, true);
        detail::apply_tensor(*D1, *A2, g1.data(), part.data(), g.N, tmp);
        detail::apply_tensor(*A1, *D2, g2.data(), part2.data(), g.N, tmp);
        acc.axpy(-nd.w, part);
        acc.axpy(-nd.w, part2);
    }
    acc = project_zero_mean(acc, prof);
    ResolventResult r{acc, 0.0};
    Field2D div = fd::d1(g1) + fd::d2(g2);
    Field2D res = apply_generator(ap, acc) - div;
    double nf = norm_L2m(div, m);
    r.residual = nf > 0 ? norm_L2m(res, m) / nf : norm_L2m(res, m);
    return r;
}

// ---- three-dimensional semigroup -----------------------------------------

namespace detail {
// out_k = sum_l Ax(k,l) in_l over slices
inline void axial_mix(const Propagator1D& Ax, const SlicedField3D& in, SlicedField3D& out) {
    const std::size_t n = in.grid().perp.size();
    for (int k = 0; k < in.N3(); ++k) {
        double* o = out.slice_data(k);
        std::fill(o, o + n, 0.0);
        const double* ar = Ax.row(k) - Ax.lo[k];
        for (int l = Ax.lo[k]; l <= Ax.hi[k]; ++l) {
            const double a = ar[l];
            const double* s = in.slice_data(l);
            for (std::size_t q = 0; q < n; ++q) o[q] += a * s[q];
        }
    }
}

inline SlicedField3D sg3d_impl(const AlphaPair& ap, double t, const SlicedField3D& w, int daxis) {
    const Grid3D& g = w.grid();
    const int N = g.perp.N;
    auto A1 = fp_propagator(N, g.perp.L, ap.alpha1, t, daxis == 1);
    auto A2 = fp_propagator(N, g.perp.L, ap.alpha2, t, daxis == 2);
    auto Ax = axial_propagator(g.N3, g.L3, t, daxis == 3);
    SlicedField3D tmp3(g), out(g);
    std::vector<double> tmp;
    for (int k = 0; k < g.N3; ++k) apply_tensor(*A1, *A2, w.slice_data(k), tmp3.slice_data(k), N, tmp);
    axial_mix(*Ax, tmp3, out);
    return out;
}
}  // namespace detail

inline SlicedField3D apply_sg_3d(const AlphaPair& ap, double t, const SlicedField3D& w) {
    if (t == 0.0) return w;
    detail::check_time(t, "apply_sg_3d");
    return detail::sg3d_impl(ap, t, w, 0);
}

// S_t d_axis g, derivative carried by the transverse or axial kernel.
inline SlicedField3D apply_sg_3d_div(const AlphaPair& ap, double t, const SlicedField3D& g, int axis) {
    detail::check_time(t, "apply_sg_3d_div");
    if (axis < 1 || axis > 3) throw std::invalid_argument("apply_sg_3d_div: axis must be 1, 2 or 3");
    return detail::sg3d_impl(ap, t, g, axis);
}

// ---- spectrum check -------------------------------------------------------

struct SpectrumResult {
    int n;
    double alpha, fitted_rate, expected_rate, rel_error;
};

// d^n exp(-alpha x^2/4) = (-sqrt(alpha)/2)^n He_n-type polynomial times the Gaussian
inline double fp_eigenfunction(int n, double alpha, double x) {
    // derivatives via the recurrence for probabilists' Hermite polynomials in y = sqrt(alpha/2) x
    const double s = std::sqrt(alpha / 2.0);
    const double y = s * x;
    double h0 = 1.0, h1 = y;
    double hn = n == 0 ? h0 : h1;
    for (int k = 2; k <= n; ++k) {
        hn = y * h1 - (k - 1) * h0;
        h0 = h1;
        h1 = hn;
    }
    return std::pow(-s, n) * hn * std::exp(-alpha * x * x / 4.0);
}

inline SpectrumResult spectrum_check(double alpha, int n, double L = 12.0, int N = 256) {
    if (n < 0 || n > 3) throw std::invalid_argument("spectrum_check: n must be in {0,1,2,3}");
    if (!(alpha > 0.0)) throw std::invalid_argument("spectrum_check: alpha must be positive");
    std::vector<double> f0(N);
    const double h = 2.0 * L / N;
    for (int i = 0; i < N; ++i) f0[i] = fp_eigenfunction(n, alpha, -L + (i + 0.5) * h);
    auto nrm = [&](const std::vector<double>& f) {
        double s = 0.0;
        for (double v : f) s += v * v;
        return std::sqrt(s * h);
    };
    // least-squares slope of log norm over t in [0, 1]
    const int K = 8;
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (int k = 0; k <= K; ++k) {
        double t = double(k) / K;
        double l = std::log(nrm(k == 0 ? f0 : apply_sg_1d(alpha, t, f0, L)));
        st += t; sl += l; stt += t * t; stl += t * l;
    }
    const double M = K + 1;
    const double slope = (M * stl - st * sl) / (M * stt - st * st);
    SpectrumResult r{n, alpha, -slope, n * alpha / 2.0, 0.0};
    r.rel_error = n == 0 ? std::abs(r.fitted_rate) : std::abs(r.fitted_rate - r.expected_rate) / r.expected_rate;
    return r;
}

}  // namespace burgers
