#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>

namespace burgers::fft {

// The FFTW planner is not reentrant.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
class Buffer {
public:
    Buffer() = default;
    explicit Buffer(std::size_t n, bool zeroed = true) : n_(n) {
        p_ = static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)));
        if (!p_) throw std::bad_alloc();
        if (zeroed)
            for (std::size_t i = 0; i < n_; ++i) p_[i] = T{};
    }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    Buffer(Buffer&& o) noexcept : p_(o.p_), n_(o.n_) { o.p_ = nullptr; o.n_ = 0; }
    Buffer& operator=(Buffer&& o) noexcept {
        if (this != &o) { release(); p_ = o.p_; n_ = o.n_; o.p_ = nullptr; o.n_ = 0; }
        return *this;
    }
    ~Buffer() { release(); }
    T* data() { return p_; }
    const T* data() const { return p_; }
    T& operator[](std::size_t i) { return p_[i]; }
    const T& operator[](std::size_t i) const { return p_[i]; }
    std::size_t size() const { return n_; }
    void zero() { for (std::size_t i = 0; i < n_; ++i) p_[i] = T{}; }

private:
    void release() { if (p_) fftw_free(p_); p_ = nullptr; }
    T* p_ = nullptr;
    std::size_t n_ = 0;
};

using cplx = std::complex<double>;

inline fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

class Plan {
public:
    Plan() = default;
    explicit Plan(fftw_plan p) : p_(p) {}
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    Plan(Plan&& o) noexcept : p_(o.p_) { o.p_ = nullptr; }
    Plan& operator=(Plan&& o) noexcept {
        if (this != &o) { reset(); p_ = o.p_; o.p_ = nullptr; }
        return *this;
    }
    ~Plan() { reset(); }
    fftw_plan get() const { return p_; }

private:
    void reset() {
        if (p_) {
            std::lock_guard<std::mutex> l(planner_mutex());
            fftw_destroy_plan(p_);
        }
        p_ = nullptr;
    }
    fftw_plan p_ = nullptr;
};

// 2D real <-> half-complex transforms of a P x P array; deterministic planning.
struct Plan2D {
    int P = 0;
    Plan fwd, inv;
    Plan2D() = default;
    explicit Plan2D(int p) : P(p) {
        Buffer<double> r(std::size_t(P) * P);
        Buffer<cplx> c(std::size_t(P) * (P / 2 + 1));
        std::lock_guard<std::mutex> l(planner_mutex());
        fwd = Plan(fftw_plan_dft_r2c_2d(P, P, r.data(), fc(c.data()), FFTW_ESTIMATE));
        inv = Plan(fftw_plan_dft_c2r_2d(P, P, fc(c.data()), r.data(), FFTW_ESTIMATE));
    }
    std::size_t csize() const { return std::size_t(P) * (P / 2 + 1); }
    void forward(double* in, cplx* out) const { fftw_execute_dft_r2c(fwd.get(), in, fc(out)); }
    // destroys in
    void inverse(cplx* in, double* out) const { fftw_execute_dft_c2r(inv.get(), fc(in), out); }
};

}  // namespace burgers::fft
