#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fd.hpp"
#include "fft.hpp"
#include "fields.hpp"

namespace burgers {

struct Velocity2D {
    Field2D u1, u2;
};

struct Velocity3D {
    SlicedField3D u1, u2, u3;
};

namespace detail {

constexpr double euler_gamma = 0.57721566490153286061;

// Origin weight c0 such that h^2 [sum_{j != 0} K(hj) f(hj) + c0 f(0)] reproduces
// int K f for the Gaussian f = exp(-|y|^2/s^2), K = log|y| / (2 pi).
inline double log_origin_weight(double h) {
    const double s = 32.0 * h;
    const int J = int(std::ceil(7.0 * s / h));
    double sum = 0.0;
    for (int a = -J; a <= J; ++a) {
        double row = 0.0;
        for (int b = -J; b <= J; ++b) {
            if (a == 0 && b == 0) continue;
            const double r2 = h * h * (double(a) * a + double(b) * b);
            row += 0.5 * std::log(r2) * std::exp(-r2 / (s * s));
        }
        sum += row;
    }
    sum /= 2.0 * std::numbers::pi;
    const double exact = 0.5 * s * s * (std::log(s) - 0.5 * euler_gamma);
    return exact / (h * h) - sum;
}

// Same for K = 1/(4 pi |y|) on the lattice (h, h, h3).
inline double newton_origin_weight(double h, double h3) {
    const double s = 16.0 * std::max(h, h3);
    const int J = int(std::ceil(7.0 * s / h)), J3 = int(std::ceil(7.0 * s / h3));
    double sum = 0.0;
    for (int c = -J3; c <= J3; ++c) {
        const double z2 = h3 * h3 * double(c) * c;
        double plane = 0.0;
        for (int a = -J; a <= J; ++a) {
            double row = 0.0;
            for (int b = -J; b <= J; ++b) {
                if (a == 0 && b == 0 && c == 0) continue;
                const double r2 = h * h * (double(a) * a + double(b) * b) + z2;
                row += std::exp(-r2 / (s * s)) / std::sqrt(r2);
            }
            plane += row;
        }
        sum += plane;
    }
    sum /= 4.0 * std::numbers::pi;
    const double exact = 0.5 * s * s;
    return exact / (h * h * h3) - sum;
}

inline int wrap(int d, int P) { return d < 0 ? d + P : d; }

}  // namespace detail

// Free-space convolution with log|x|/(2 pi) on a Grid2D via the doubled box.
class LogPotential2D {
public:
    explicit LogPotential2D(const Grid2D& g) : g_(g), P_(2 * g.N), plan_(P_), khat_(plan_.csize()) {
        const int N = g.N, P = P_;
        const double h = g.h();
        fft::Buffer<double> k(std::size_t(P) * P);
        const double c0 = detail::log_origin_weight(h);
        for (int a = -N; a < N; ++a)
            for (int b = -N; b < N; ++b) {
                double v;
                if (a == 0 && b == 0) v = c0;
                else v = std::log(h * std::hypot(double(a), double(b))) / (2.0 * std::numbers::pi);
                k[std::size_t(detail::wrap(a, P)) * P + detail::wrap(b, P)] = v;
            }
        fft::Buffer<fft::cplx> kc(plan_.csize());
        plan_.forward(k.data(), kc.data());
        const double scale = h * h / (double(P) * P);
        for (std::size_t q = 0; q < plan_.csize(); ++q) khat_[q] = kc[q].real() * scale;
        const int W = P / 2 + 1;
        fft::Buffer<double> rw(std::size_t(N) * P);
        std::lock_guard<std::mutex> l(fft::planner_mutex());
        rows_fwd_ = fft::Plan(fftw_plan_many_dft_r2c(1, &P_, N, rw.data(), nullptr, 1, P, fft::fc(kc.data()), nullptr, 1, W,
                                                     FFTW_ESTIMATE));
        cols_fwd_ = fft::Plan(fftw_plan_many_dft(1, &P_, W, fft::fc(kc.data()), nullptr, W, 1, fft::fc(kc.data()), nullptr,
                                                 W, 1, FFTW_FORWARD, FFTW_ESTIMATE));
        cols_inv_ = fft::Plan(fftw_plan_many_dft(1, &P_, W, fft::fc(kc.data()), nullptr, W, 1, fft::fc(kc.data()), nullptr,
                                                 W, 1, FFTW_BACKWARD, FFTW_ESTIMATE));
        rows_inv_ = fft::Plan(fftw_plan_many_dft_c2r(1, &P_, N, fft::fc(kc.data()), nullptr, 1, W, rw.data(), nullptr, 1, P,
                                                     FFTW_ESTIMATE));
    }
    const Grid2D& grid() const { return g_; }
    int P() const { return P_; }
    const fft::Plan2D& plan() const { return plan_; }
    // scaled real spectrum: inverse(khat * fhat) gives the potential on the grid
    const std::vector<double>& khat() const { return khat_; }

    // Zero-padded forward transform: row r2c on the N data rows only, then
    // column c2c. work must hold N*P doubles.
    void transform(const double* f, fft::cplx* out, fft::Buffer<double>& work) const {
        const int N = g_.N, P = P_;
        const std::size_t W = std::size_t(P / 2 + 1);
        for (int i = 0; i < N; ++i) {
            double* w = work.data() + std::size_t(i) * P;
            std::copy(f + std::size_t(i) * N, f + std::size_t(i + 1) * N, w);
            std::fill(w + N, w + P, 0.0);
        }
        fftw_execute_dft_r2c(rows_fwd_.get(), work.data(), fft::fc(out));
        std::fill(out + std::size_t(N) * W, out + std::size_t(P) * W, fft::cplx(0.0));
        fftw_execute_dft(cols_fwd_.get(), fft::fc(out), fft::fc(out));
    }
    // spectrum -> grid values; only the N data rows are synthesized (spectrum is destroyed)
    void untransform(fft::cplx* spectrum, double* out, fft::Buffer<double>& work) const {
        const int N = g_.N, P = P_;
        fftw_execute_dft(cols_inv_.get(), fft::fc(spectrum), fft::fc(spectrum));
        fftw_execute_dft_c2r(rows_inv_.get(), fft::fc(spectrum), work.data());
        for (int i = 0; i < N; ++i)
            std::copy(work.data() + std::size_t(i) * P, work.data() + std::size_t(i) * P + N, out + std::size_t(i) * N);
    }
    std::size_t work_size() const { return std::size_t(g_.N) * P_; }

    Field2D apply(const Field2D& f) const {
        if (!(f.grid() == g_)) throw std::invalid_argument("LogPotential2D: grid mismatch");
        fft::Buffer<double> work(work_size());
        fft::Buffer<fft::cplx> spectrum(plan_.csize());
        transform(f.data(), spectrum.data(), work);
        for (std::size_t q = 0; q < plan_.csize(); ++q) spectrum[q] *= khat_[q];
        Field2D out(g_);
        untransform(spectrum.data(), out.data(), work);
        return out;
    }

    static std::shared_ptr<const LogPotential2D> get(const Grid2D& g) {
        static std::mutex mu;
        static std::map<std::pair<double, int>, std::shared_ptr<const LogPotential2D>> cache;
        std::lock_guard<std::mutex> l(mu);
        auto key = std::make_pair(g.L, g.N);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto p = std::make_shared<const LogPotential2D>(g);
        cache[key] = p;
        return p;
    }

private:
    Grid2D g_;
    int P_;
    fft::Plan2D plan_;
    std::vector<double> khat_;
    fft::Plan rows_fwd_, cols_fwd_, cols_inv_, rows_inv_;
};

inline Velocity2D biot_savart_2d(const Field2D& omega) {
    detail::require_finite(omega.values(), "biot_savart_2d");
    auto lp = LogPotential2D::get(omega.grid());
    Field2D psi = lp->apply(omega);
    Velocity2D v{fd::d2(psi), fd::d1(psi)};
    v.u1 *= -1.0;
    return v;
}

// Vector potential A = N * w of x3-clamped sliced data, N = 1/(4 pi |x|).
// Data are split into mid + box remainder + semi-infinite tails carrying +-dif.
class NewtonPotential3D {
public:
    explicit NewtonPotential3D(const Grid3D& g)
        : g_(g), lp_(LogPotential2D::get(g.perp)), P_(2 * g.perp.N), P3_(2 * g.N3) {
        const int N = g.perp.N, N3 = g.N3, P = P_, P3 = P3_;
        const double h = g.perp.h(), h3 = g.h3();
        const std::size_t cs = lp_->plan().csize();
        fft::Buffer<double> work(std::size_t(P) * P);
        fft::Buffer<fft::cplx> spectrum(cs);
        if (N3 > 1) {
            // box kernel, one transverse spectrum per axial offset, then axial DFT
            const double c0 = detail::newton_origin_weight(h, h3);
            fft::Buffer<fft::cplx> col(std::size_t(P3) * cs);
            for (int c = -N3; c < N3; ++c) {
                work.zero();
                for (int a = -N; a < N; ++a)
                    for (int b = -N; b < N; ++b) {
                        double v;
                        if (a == 0 && b == 0 && c == 0) v = c0;
                        else {
                            double r = std::sqrt(h * h * (double(a) * a + double(b) * b) + h3 * h3 * double(c) * c);
                            v = 1.0 / (4.0 * std::numbers::pi * r);
                        }
                        work[std::size_t(detail::wrap(a, P)) * P + detail::wrap(b, P)] = v;
                    }
                lp_->plan().forward(work.data(), col.data() + std::size_t(detail::wrap(c, P3)) * cs);
            }
            {
                std::lock_guard<std::mutex> l(fft::planner_mutex());
                axial_fwd_ = fft::Plan(fftw_plan_many_dft(1, &P3_, int(cs), fft::fc(col.data()), nullptr, int(cs), 1,
                                                          fft::fc(col.data()), nullptr, int(cs), 1, FFTW_FORWARD,
                                                          FFTW_ESTIMATE));
                fft::Buffer<fft::cplx> blk(std::size_t(P3) * kBlock);
                blk_fwd_ = fft::Plan(fftw_plan_many_dft(1, &P3_, kBlock, fft::fc(blk.data()), nullptr, kBlock, 1,
                                                        fft::fc(blk.data()), nullptr, kBlock, 1, FFTW_FORWARD,
                                                        FFTW_ESTIMATE));
                blk_inv_ = fft::Plan(fftw_plan_many_dft(1, &P3_, kBlock, fft::fc(blk.data()), nullptr, kBlock, 1,
                                                        fft::fc(blk.data()), nullptr, kBlock, 1, FFTW_BACKWARD,
                                                        FFTW_ESTIMATE));
            }
            fftw_execute_dft(axial_fwd_.get(), fft::fc(col.data()), fft::fc(col.data()));
            box_hat_.resize(std::size_t(P3) * cs);
            const double scale = h * h * h3 / (double(P) * P * P3);
            for (std::size_t q = 0; q < box_hat_.size(); ++q) box_hat_[q] = col[q].real() * scale;

            // tail kernels per output plane
            tail_hat_.resize(std::size_t(N3) * cs);
            const double L3 = g.L3;
            for (int k = 0; k < N3; ++k) {
                const double x3 = g.x3(k);
                const double A = L3 + x3, B = L3 - x3;
                work.zero();
                for (int a = -N; a < N; ++a)
                    for (int b = -N; b < N; ++b) {
                        const double z = h * std::hypot(double(a), double(b));
                        double v;
                        if (z == 0.0) v = std::log(A / B);
                        else v = std::log((A + std::hypot(A, z)) / (B + std::hypot(B, z)));
                        work[std::size_t(detail::wrap(a, P)) * P + detail::wrap(b, P)] = v / (4.0 * std::numbers::pi);
                    }
                lp_->plan().forward(work.data(), spectrum.data());
                const double s2 = h * h / (double(P) * P);
                for (std::size_t q = 0; q < cs; ++q) tail_hat_[std::size_t(k) * cs + q] = spectrum[q].real() * s2;
            }
        }
    }

    const Grid3D& grid() const { return g_; }

    // Returns A on the grid for one scalar component.
    SlicedField3D apply(const SlicedField3D& w) const {
        if (!(w.grid() == g_)) throw std::invalid_argument("NewtonPotential3D: grid mismatch");
        const int N3 = g_.N3;
        const std::size_t cs = lp_->plan().csize();
        const std::size_t np = g_.perp.size();
        fft::Buffer<double> work(lp_->work_size());
        SlicedField3D out(g_);
        const auto& khat = lp_->khat();
        // mid and dif
        std::vector<double> mid(np), dif(np);
        const double* bot = w.slice_data(0);
        const double* top = w.slice_data(N3 - 1);
        for (std::size_t q = 0; q < np; ++q) { mid[q] = 0.5 * (top[q] + bot[q]); dif[q] = 0.5 * (top[q] - bot[q]); }
        fft::Buffer<fft::cplx> mhat(cs), dhat(cs), spectrum(cs);
        lp_->transform(mid.data(), mhat.data(), work);
        if (N3 == 1) {
            for (std::size_t q = 0; q < cs; ++q) spectrum[q] = -khat[q] * mhat[q];
            lp_->untransform(spectrum.data(), out.slice_data(0), work);
            return out;
        }
        lp_->transform(dif.data(), dhat.data(), work);
        // 2D spectra of the box remainder, one plane per slice
        fft::Buffer<fft::cplx> col(std::size_t(N3) * cs, false);
        std::vector<double> r(np);
        for (int k = 0; k < N3; ++k) {
            const double* s = w.slice_data(k);
            for (std::size_t q = 0; q < np; ++q) r[q] = s[q] - mid[q];
            lp_->transform(r.data(), col.data() + std::size_t(k) * cs, work);
        }
        // axial convolution on blocks of transverse wavenumbers
        fft::Buffer<fft::cplx> blk(std::size_t(P3_) * kBlock, false);
        for (std::size_t q0 = 0; q0 < cs; q0 += kBlock) {
            const int nb = int(std::min<std::size_t>(kBlock, cs - q0));
            for (int k = 0; k < N3; ++k) {
                const fft::cplx* c = col.data() + std::size_t(k) * cs + q0;
                fft::cplx* d = blk.data() + std::size_t(k) * kBlock;
                for (int b = 0; b < nb; ++b) d[b] = c[b];
                for (int b = nb; b < kBlock; ++b) d[b] = 0.0;
            }
            std::fill(blk.data() + std::size_t(N3) * kBlock, blk.data() + std::size_t(P3_) * kBlock, fft::cplx(0.0));
            fftw_execute_dft(blk_fwd_.get(), fft::fc(blk.data()), fft::fc(blk.data()));
            for (int j = 0; j < P3_; ++j) {
                const double* kh = box_hat_.data() + std::size_t(j) * cs + q0;
                fft::cplx* d = blk.data() + std::size_t(j) * kBlock;
                for (int b = 0; b < nb; ++b) d[b] *= kh[b];
            }
            fftw_execute_dft(blk_inv_.get(), fft::fc(blk.data()), fft::fc(blk.data()));
            for (int k = 0; k < N3; ++k) {
                fft::cplx* c = col.data() + std::size_t(k) * cs + q0;
                const fft::cplx* d = blk.data() + std::size_t(k) * kBlock;
                const double* th = tail_hat_.data() + std::size_t(k) * cs + q0;
                for (int b = 0; b < nb; ++b)
                    c[b] = d[b] + th[b] * dhat[q0 + b] - khat[q0 + b] * mhat[q0 + b];
            }
        }
        for (int k = 0; k < N3; ++k) lp_->untransform(col.data() + std::size_t(k) * cs, out.slice_data(k), work);
        return out;
    }

    static std::shared_ptr<const NewtonPotential3D> get(const Grid3D& g) {
        static std::mutex mu;
        static std::map<std::tuple<double, int, double, int>, std::shared_ptr<const NewtonPotential3D>> cache;
        std::lock_guard<std::mutex> l(mu);
        auto key = std::make_tuple(g.perp.L, g.perp.N, g.L3, g.N3);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto p = std::make_shared<const NewtonPotential3D>(g);
        cache[key] = p;
        return p;
    }

private:
    Grid3D g_;
    std::shared_ptr<const LogPotential2D> lp_;
    int P_, P3_;
    static constexpr int kBlock = 64;
    fft::Plan axial_fwd_, blk_fwd_, blk_inv_;
    std::vector<double> box_hat_;
    std::vector<double> tail_hat_;
};

inline Velocity3D curl(const SlicedField3D& A1, const SlicedField3D& A2, const SlicedField3D& A3) {
    Velocity3D v{fd::d(A3, 2) - fd::d(A2, 3), fd::d(A1, 3) - fd::d(A3, 1), fd::d(A2, 1) - fd::d(A1, 2)};
    return v;
}

inline Velocity3D biot_savart_3d(const Triple& w) {
    const Grid3D& g = w[0].grid();
    if (!(w[1].grid() == g) || !(w[2].grid() == g)) throw std::invalid_argument("biot_savart_3d: inconsistent grids");
    for (const auto& c : w) detail::require_finite(c.values(), "biot_savart_3d");
    auto np = NewtonPotential3D::get(g);
    return curl(np->apply(w[0]), np->apply(w[1]), np->apply(w[2]));
}

// Velocity of (0, 0, w3): only the third potential component is needed.
inline Velocity3D biot_savart_3d_axial(const SlicedField3D& w3) {
    detail::require_finite(w3.values(), "biot_savart_3d");
    auto A3 = NewtonPotential3D::get(w3.grid())->apply(w3);
    Velocity3D v{fd::d(A3, 2), fd::d(A3, 1), SlicedField3D(w3.grid())};
    v.u2 *= -1.0;
    return v;
}

// Discrete divergence with the same difference operators, evaluated on the
// points whose stencils are all central (at least four cells from the faces).
inline double interior_divergence_ratio(const Velocity3D& v) {
    auto div = fd::d(v.u1, 1) + fd::d(v.u2, 2) + fd::d(v.u3, 3);
    const Grid3D& g = v.u1.grid();
    const int N = g.perp.N, N3 = g.N3, e = 4;
    const int e3 = N3 > 2 * e ? e : 0;
    double sd = 0.0, sg = 0.0;
    std::array<const SlicedField3D*, 3> comps{&v.u1, &v.u2, &v.u3};
    std::vector<SlicedField3D> grads;
    for (auto* c : comps)
        for (int a = 1; a <= 3; ++a) grads.push_back(fd::d(*c, a));
    for (int k = e3; k < N3 - e3; ++k)
        for (int i = e; i < N - e; ++i)
            for (int j = e; j < N - e; ++j) {
                sd += div(k, i, j) * div(k, i, j);
                for (auto& gr : grads) sg += gr(k, i, j) * gr(k, i, j);
            }
    return sg > 0 ? std::sqrt(sd / sg) : std::sqrt(sd);
}

inline double interior_divergence_ratio(const Velocity2D& v) {
    Field2D div = fd::d1(v.u1) + fd::d2(v.u2);
    Field2D g11 = fd::d1(v.u1), g12 = fd::d2(v.u1), g21 = fd::d1(v.u2), g22 = fd::d2(v.u2);
    const int N = v.u1.N(), e = 4;
    double sd = 0.0, sg = 0.0;
    for (int i = e; i < N - e; ++i)
        for (int j = e; j < N - e; ++j) {
            sd += div(i, j) * div(i, j);
            sg += g11(i, j) * g11(i, j) + g12(i, j) * g12(i, j) + g21(i, j) * g21(i, j) + g22(i, j) * g22(i, j);
        }
    return sg > 0 ? std::sqrt(sd / sg) : std::sqrt(sd);
}

}  // namespace burgers
