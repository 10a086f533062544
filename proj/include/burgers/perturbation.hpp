#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "axial.hpp"
#include "biot_savart.hpp"
#include "fd.hpp"
#include "fields.hpp"
#include "semigroup.hpp"
#include "vortex.hpp"

namespace burgers {

// Everything that depends on phi(t) alone: the modulated vortex
// Omega^B(rho + phi(x3)), its 3D velocity, and the slice-wise 2D velocity.
struct ModulatedVortex {
    double rho = 0.0;
    AxialProfile phi;
    SlicedField3D Omega;
    Velocity3D Ut;             // Biot-Savart of (0, 0, Omega)
    SlicedField3D UB1, UB2;    // U^B(rho + phi(x3)) slice by slice
    SlicedField3D d2Omega;     // d^2_rho Omega^B(rho + phi(x3))
};

inline ModulatedVortex modulated_vortex(const VortexFamily& fam, const Grid3D& g, double rho, const AxialProfile& phi) {
    if (!(fam.grid() == g.perp)) throw std::invalid_argument("modulated_vortex: transverse grid mismatch");
    if (phi.N3 != g.N3 || phi.L3 != g.L3) throw std::invalid_argument("modulated_vortex: axial grid mismatch");
    for (double p : phi.values) fam.require(rho + p);
    ModulatedVortex mv{rho, phi, SlicedField3D(g), {}, SlicedField3D(g), SlicedField3D(g), SlicedField3D(g)};
    for (int k = 0; k < g.N3; ++k) {
        const double r = rho + phi.values[k];
        fam.omega_into(r, mv.Omega.slice_data(k));
        Velocity2D v = fam.velocity(r);
        mv.UB1.set_slice(k, v.u1);
        mv.UB2.set_slice(k, v.u2);
        mv.d2Omega.set_slice(k, fam.d2_omega());
    }
    mv.Ut = biot_savart_3d_axial(mv.Omega);
    return mv;
}

struct ModulatedVelocity {
    Velocity3D velocity;   // 3D law applied to Omega^B(rho + phi(x3)) e3
    Velocity3D slicewise;  // U^B(rho + phi(x3)) per slice
    SlicedField3D gap;     // |velocity - slicewise| pointwise
    double sup_gap = 0.0;  // over the interior two-thirds of the box
};

// max over |x_perp_i| <= 2 L/3 and |x3| <= 2 L3/3
inline double interior_sup(const SlicedField3D& f) {
    const Grid3D& g = f.grid();
    double m = 0.0;
    for (int k = 0; k < g.N3; ++k) {
        if (std::abs(g.x3(k)) > 2.0 * g.L3 / 3.0 && g.N3 > 1) continue;
        for (int i = 0; i < g.perp.N; ++i) {
            if (std::abs(g.perp.x(i)) > 2.0 * g.perp.L / 3.0) continue;
            for (int j = 0; j < g.perp.N; ++j) {
                if (std::abs(g.perp.x(j)) > 2.0 * g.perp.L / 3.0) continue;
                m = std::max(m, std::abs(f(k, i, j)));
            }
        }
    }
    return m;
}

inline ModulatedVelocity modulated_vortex_velocity(const VortexFamily& fam, const Grid3D& g, double rho,
                                                   const AxialProfile& phi) {
    ModulatedVortex mv = modulated_vortex(fam, g, rho, phi);
    ModulatedVelocity r{mv.Ut, Velocity3D{mv.UB1, mv.UB2, SlicedField3D(g)}, SlicedField3D(g), 0.0};
    auto& gp = r.gap.values();
    for (std::size_t q = 0; q < gp.size(); ++q)
        gp[q] = std::hypot(r.velocity.u1.values()[q] - mv.UB1.values()[q], r.velocity.u2.values()[q] - mv.UB2.values()[q]);
    r.sup_gap = interior_sup(r.gap);
    return r;
}

// ---- right-hand side terms -------------------------------------------------

namespace detail {
inline SlicedField3D mul(const SlicedField3D& a, const SlicedField3D& b) {
    SlicedField3D r = a;
    auto& v = r.values();
    const auto& w = b.values();
    for (std::size_t q = 0; q < v.size(); ++q) v[q] *= w[q];
    return r;
}
// a*b - c*d
inline SlicedField3D cross(const SlicedField3D& a, const SlicedField3D& b, const SlicedField3D& c, const SlicedField3D& d) {
    SlicedField3D r(a.grid());
    auto& v = r.values();
    for (std::size_t q = 0; q < v.size(); ++q)
        v[q] = a.values()[q] * b.values()[q] - c.values()[q] * d.values()[q];
    return r;
}
// a*b + c*d
inline SlicedField3D dot2(const SlicedField3D& a, const SlicedField3D& b, const SlicedField3D& c, const SlicedField3D& d) {
    SlicedField3D r(a.grid());
    auto& v = r.values();
    for (std::size_t q = 0; q < v.size(); ++q)
        v[q] = a.values()[q] * b.values()[q] + c.values()[q] * d.values()[q];
    return r;
}
inline SlicedField3D dphi_squared(const ModulatedVortex& mv) {
    const Grid3D& g = mv.Omega.grid();
    std::vector<double> dp = mv.phi.derivative();
    for (double& a : dp) a *= a;
    SlicedField3D r = mv.d2Omega;
    for (int k = 0; k < g.N3; ++k) {
        double* s = r.slice_data(k);
        for (std::size_t q = 0; q < g.perp.size(); ++q) s[q] *= dp[k];
    }
    return r;
}
}  // namespace detail

// P_phi omega = curl(Ut x omega + u x Omega e3)
inline Triple term_P(const ModulatedVortex& mv, const Triple& w, const Velocity3D& u) {
    using detail::cross;
    using detail::dot2;
    const auto& U1 = mv.Ut.u1;
    const auto& U2 = mv.Ut.u2;
    const auto& Om = mv.Omega;
    SlicedField3D a = cross(U1, w[1], U2, w[0]);
    SlicedField3D b1 = dot2(U1, w[2], u.u1, Om);
    SlicedField3D b2 = dot2(U2, w[2], u.u2, Om);
    Triple r{fd::d(a, 2) + fd::d(b1, 3), fd::d(b2, 3) - fd::d(a, 1), SlicedField3D(Om.grid())};
    r[2] -= fd::d(b1, 1);
    r[2] -= fd::d(b2, 2);
    return r;
}

// N(omega) = curl(u x omega)
inline Triple term_N(const Triple& w, const Velocity3D& u) {
    using detail::cross;
    SlicedField3D a = cross(u.u1, w[1], u.u2, w[0]);
    SlicedField3D b = cross(u.u1, w[2], u.u3, w[0]);
    SlicedField3D c = cross(u.u2, w[2], u.u3, w[1]);
    Triple r{fd::d(a, 2) + fd::d(b, 3), fd::d(c, 3) - fd::d(a, 1), SlicedField3D(a.grid())};
    r[2] -= fd::d(b, 1);
    r[2] -= fd::d(c, 2);
    return r;
}

// H(phi) = (d3(Ut1 Om), d3(Ut2 Om), div_perp((UB - Ut) Om) + d2Om (d3 phi)^2)
inline Triple term_H(const ModulatedVortex& mv) {
    const auto& Om = mv.Omega;
    SlicedField3D g1 = detail::mul(mv.UB1 - mv.Ut.u1, Om);
    SlicedField3D g2 = detail::mul(mv.UB2 - mv.Ut.u2, Om);
    Triple r{fd::d(detail::mul(mv.Ut.u1, Om), 3), fd::d(detail::mul(mv.Ut.u2, Om), 3), fd::d(g1, 1) + fd::d(g2, 2)};
    r[2] += detail::dphi_squared(mv);
    return r;
}

// F = P + N + H assembled as curl(U x W) + e3 [div_perp(UB Om) + d2Om (d3 phi)^2]
// with U = Ut + u and W = omega + Om e3.
inline Triple rhs_F(const ModulatedVortex& mv, const Triple& w, const Velocity3D& u) {
    const Grid3D& g = mv.Omega.grid();
    const std::size_t n = g.size();
    SlicedField3D a(g), b1(g), b2(g), c1(g), c2(g);
    {
        const double *ut1 = mv.Ut.u1.data(), *ut2 = mv.Ut.u2.data();
        const double *v1 = u.u1.data(), *v2 = u.u2.data(), *v3 = u.u3.data();
        const double *w1 = w[0].data(), *w2 = w[1].data(), *w3 = w[2].data(), *om = mv.Omega.data();
        const double *ub1 = mv.UB1.data(), *ub2 = mv.UB2.data();
        double *pa = a.data(), *pb1 = b1.data(), *pb2 = b2.data(), *pc1 = c1.data(), *pc2 = c2.data();
        for (std::size_t q = 0; q < n; ++q) {
            const double U1 = ut1[q] + v1[q], U2 = ut2[q] + v2[q], W3 = w3[q] + om[q];
            pa[q] = U1 * w2[q] - U2 * w1[q];
            pb1[q] = U1 * W3 - v3[q] * w1[q];
            pb2[q] = U2 * W3 - v3[q] * w2[q];
            pc1[q] = ub1[q] * om[q] - pb1[q];
            pc2[q] = ub2[q] * om[q] - pb2[q];
        }
    }
    Triple r{fd::d(a, 2) + fd::d(b1, 3), fd::d(b2, 3) - fd::d(a, 1), fd::d(c1, 1) + fd::d(c2, 2)};
    r[2] += detail::dphi_squared(mv);
    return r;
}

// ---- time stepping -----------------------------------------------------------

struct EvolutionConfig {
    VortexParams params;
    Grid3D grid;
    double dt = 0.01;
    double T = 10.0;
    double measure_half_width = 4.0;  // I = [-a, a]
    std::vector<int> circ_slices;     // slice indices reported in the diagnostics
    int sample_every = 10;            // steps between diagnostic rows
    double fit_t0 = 2.0;              // decay fit uses samples with t >= fit_t0
    double growth_limit = 10.0;       // instability detector

    int steps() const { return int(std::llround(T / dt)); }
    void validate() const {
        params.validate();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
        if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be non-negative");
        if (std::abs(steps() * dt - T) > 1e-9 * std::max(1.0, T)) throw std::invalid_argument("T must be a multiple of dt");
        if (!(measure_half_width > 0.0)) throw std::invalid_argument("measure interval must be non-empty");
        if (sample_every < 1) throw std::invalid_argument("sample_every must be positive");
        for (int k : circ_slices)
            if (k < 0 || k >= grid.N3) throw std::invalid_argument("circulation slice index out of range");
    }
};

struct EvolutionState {
    double t = 0.0;
    int step = 0;
    AxialProfile phi;
    Triple omega;
};

struct DiagnosticRow {
    double t = 0.0;
    double omega_norm = 0.0;   // sum_i ||omega_i||_{X2(m)}
    double phi_sup_dev = 0.0;  // sup_I |phi - delta_rho|
    double dev_norm = 0.0;     // sup_I ||Omega - Omega^B(rho + delta_rho) e3||_{L2(m)}
    double circ_mean = 0.0;    // mean slice circulation over |x3| <= L3/2
    std::vector<double> circ;  // circulation on the configured slices
};

class EvolutionError : public std::runtime_error {
public:
    EvolutionError(const std::string& what, std::vector<DiagnosticRow> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<DiagnosticRow>& trace() const { return trace_; }

private:
    std::vector<DiagnosticRow> trace_;
};

// (phi0, omega0) with Omega0 = Omega^B(rho + phi0(x3)) e3 + omega0 and omega0_3 mean-free per slice.
inline std::pair<AxialProfile, Triple> decompose_initial(const Triple& Omega0, const VortexFamily& fam, double rho) {
    const Grid3D& g = Omega0[0].grid();
    if (!(Omega0[1].grid() == g) || !(Omega0[2].grid() == g)) throw std::invalid_argument("decompose_initial: grid mismatch");
    std::vector<double> c = slice_integrals(Omega0[2]);
    for (double& v : c) v -= rho;
    AxialProfile phi0(g.L3, g.N3, c);
    for (double p : c) fam.require(rho + p);
    Triple w = Omega0;
    std::vector<double> slice(g.perp.size());
    for (int k = 0; k < g.N3; ++k) {
        fam.omega_into(rho + c[k], slice.data());
        double* s = w[2].slice_data(k);
        for (std::size_t q = 0; q < slice.size(); ++q) s[q] -= slice[q];
    }
    project_zero_mean_slices(w[2], invariant_profile(fam.params().alphas(), g.perp));
    return {phi0, w};
}

// e^{t LL}: component i gets e^{beta_i t} S_t with beta = (-(3+lambda)/2, -(3-lambda)/2, 0).
inline Triple apply_strained_semigroup(double lambda, double t, const Triple& w) {
    const AlphaPair ap = AlphaPair::from_lambda(lambda);
    const double beta[3] = {-(3.0 + lambda) / 2.0, -(3.0 - lambda) / 2.0, 0.0};
    Triple r{apply_sg_3d(ap, t, w[0]), apply_sg_3d(ap, t, w[1]), apply_sg_3d(ap, t, w[2])};
    for (int i = 0; i < 3; ++i)
        if (beta[i] != 0.0) r[i] *= std::exp(beta[i] * t);
    return r;
}

inline double xnorm(const Triple& w, double m) { return norm_X2m(w[0], m) + norm_X2m(w[1], m) + norm_X2m(w[2], m); }

// Owns the vortex family and the initial axial mode; phi(t) always comes
// from the closed form applied to phi0.
class DuhamelStepper {
public:
    DuhamelStepper(const VortexFamily& fam, const EvolutionConfig& cfg, AxialProfile phi0)
        : fam_(fam), cfg_(cfg), phi0_(std::move(phi0)), profile_(invariant_profile(cfg.params.alphas(), cfg.grid.perp)) {}

    const EvolutionConfig& config() const { return cfg_; }
    const VortexFamily& family() const { return fam_; }
    const AxialProfile& phi0() const { return phi0_; }

    const ModulatedVortex& fields_at(double t) {
        for (auto& c : cache_)
            if (c && c->first == t) return c->second;
        AxialProfile phi = phi_evolve_exact(phi0_, t);
        if (phi.deriv.empty()) phi.deriv = phi.derivative();
        cache_[slot_] = std::make_pair(t, modulated_vortex(fam_, cfg_.grid, cfg_.params.rho, phi));
        const ModulatedVortex& r = cache_[slot_]->second;
        slot_ ^= 1;
        return r;
    }

    Triple F(double t, const Triple& w) {
        const ModulatedVortex& mv = fields_at(t);
        return rhs_F(mv, w, biot_savart_3d(w));
    }

    // Exponential trapezoid: A = e^{dt LL} w, B = e^{dt LL} F(w),
    // w* = A + dt B, w+ = A + dt/2 (B + F(w*)).
    EvolutionState step(const EvolutionState& s) {
        const double dt = cfg_.dt, lam = cfg_.params.lambda;
        const double t1 = (s.step + 1) * dt;
        Triple A = apply_strained_semigroup(lam, dt, s.omega);
        Triple B = apply_strained_semigroup(lam, dt, F(s.t, s.omega));
        Triple ws = A;
        for (int i = 0; i < 3; ++i) ws[i].axpy(dt, B[i]);
        Triple Fs = F(t1, ws);
        EvolutionState n;
        n.t = t1;
        n.step = s.step + 1;
        n.phi = fields_at(t1).phi;
        n.omega = std::move(A);
        for (int i = 0; i < 3; ++i) {
            n.omega[i].axpy(0.5 * dt, B[i]);
            n.omega[i].axpy(0.5 * dt, Fs[i]);
        }
        project_zero_mean_slices(n.omega[2], profile_);
        return n;
    }

private:
    VortexFamily fam_;
    EvolutionConfig cfg_;
    AxialProfile phi0_;
    Field2D profile_;
    std::optional<std::pair<double, ModulatedVortex>> cache_[2];
    int slot_ = 0;
};

inline EvolutionState duhamel_step(const VortexFamily& fam, const EvolutionConfig& cfg, const AxialProfile& phi0,
                                   const EvolutionState& s) {
    DuhamelStepper st(fam, cfg, phi0);
    return st.step(s);
}

struct EvolutionResult {
    std::vector<DiagnosticRow> series;
    double delta_rho_formula = 0.0;
    double delta_rho_measured = 0.0;
    double fitted_decay_exponent = 0.0;
    int fit_samples = 0;
    EvolutionState final_state;
};

// Least-squares slope of log y against t over samples with t >= t0 and y > 0.
inline double fit_decay_exponent(const std::vector<DiagnosticRow>& s, double t0, int* count = nullptr) {
    double st = 0, sl = 0, stt = 0, stl = 0;
    int n = 0;
    for (const auto& r : s) {
        if (r.t < t0 || !(r.dev_norm > 0.0)) continue;
        const double l = std::log(r.dev_norm);
        st += r.t; sl += l; stt += r.t * r.t; stl += r.t * l;
        ++n;
    }
    if (count) *count = n;
    if (n < 2) return 0.0;
    return -(n * stl - st * sl) / (n * stt - st * st);
}

class EvolutionRun {
public:
    EvolutionRun(const VortexFamily& fam, const EvolutionConfig& cfg, const Triple& Omega0)
        : cfg_(cfg), stepper_(fam, cfg, AxialProfile()) {
        cfg_.validate();
        if (!(Omega0[0].grid() == cfg.grid)) throw std::invalid_argument("EvolutionRun: grid mismatch");
        auto [phi0, w0] = decompose_initial(Omega0, fam, cfg.params.rho);
        stepper_ = DuhamelStepper(fam, cfg_, phi0);
        delta_rho_ = shift_delta_rho(phi0);
        fam.require(cfg.params.rho + delta_rho_);
        target_ = fam.omega(cfg.params.rho + delta_rho_);
        state_.t = 0.0;
        state_.step = 0;
        state_.phi = phi0;
        state_.omega = std::move(w0);
    }

    const EvolutionState& state() const { return state_; }
    double delta_rho_formula() const { return delta_rho_; }

    DiagnosticRow diagnose(const EvolutionState& s) {
        const Grid3D& g = cfg_.grid;
        const double m = cfg_.params.m;
        DiagnosticRow d;
        d.t = s.t;
        d.omega_norm = xnorm(s.omega, m);
        const ModulatedVortex& mv = stepper_.fields_at(s.t);
        std::vector<double> circ(g.N3);
        std::vector<double> dev(g.perp.size());
        double sum = 0.0;
        int cnt = 0;
        for (int k = 0; k < g.N3; ++k) {
            const double* om = mv.Omega.slice_data(k);
            const double* w3 = s.omega[2].slice_data(k);
            for (std::size_t q = 0; q < dev.size(); ++q) dev[q] = om[q] + w3[q];
            circ[k] = transverse_integral(g.perp, dev.data());
            if (std::abs(g.x3(k)) <= 0.5 * g.L3) { sum += circ[k]; ++cnt; }
            if (std::abs(g.x3(k)) > cfg_.measure_half_width) continue;
            d.phi_sup_dev = std::max(d.phi_sup_dev, std::abs(s.phi.values[k] - delta_rho_));
            for (std::size_t q = 0; q < dev.size(); ++q) dev[q] -= target_.data()[q];
            const double n3 = detail::l2m_raw(g.perp, dev.data(), m);
            const double n1 = slice_norm_L2m(s.omega[0], k, m), n2 = slice_norm_L2m(s.omega[1], k, m);
            d.dev_norm = std::max(d.dev_norm, std::sqrt(n1 * n1 + n2 * n2 + n3 * n3));
        }
        d.circ_mean = cnt ? sum / cnt : 0.0;
        for (int k : cfg_.circ_slices) d.circ.push_back(circ[k]);
        return d;
    }

    // Steps to T; on_sample sees every diagnostic row with its state.
    EvolutionResult run(const std::function<void(const EvolutionState&, const DiagnosticRow&)>& on_sample = {}) {
        EvolutionResult res;
        res.delta_rho_formula = delta_rho_;
        auto record = [&](const EvolutionState& s) {
            res.series.push_back(diagnose(s));
            if (on_sample) on_sample(s, res.series.back());
        };
        record(state_);
        const int n = cfg_.steps();
        double prev = xnorm(state_.omega, cfg_.params.m);
        for (int k = 0; k < n; ++k) {
            EvolutionState next = stepper_.step(state_);
            const double cur = xnorm(next.omega, cfg_.params.m);
            if (!std::isfinite(cur) || (prev > 1e-12 && cur > cfg_.growth_limit * prev)) {
                res.series.push_back(diagnose(state_));
                throw EvolutionError("instability detected at t = " + std::to_string(next.t), res.series);
            }
            prev = cur;
            state_ = std::move(next);
            if (state_.step % cfg_.sample_every == 0 || state_.step == n) record(state_);
        }
        res.delta_rho_measured = res.series.back().circ_mean - cfg_.params.rho;
        res.fitted_decay_exponent = fit_decay_exponent(res.series, cfg_.fit_t0, &res.fit_samples);
        res.final_state = state_;
        return res;
    }

private:
    EvolutionConfig cfg_;
    DuhamelStepper stepper_;
    double delta_rho_ = 0.0;
    Field2D target_;
    EvolutionState state_;
};

inline EvolutionResult run_evolution(const VortexFamily& fam, const EvolutionConfig& cfg, const Triple& Omega0,
                                     const std::function<void(const EvolutionState&, const DiagnosticRow&)>& on_sample = {}) {
    EvolutionRun r(fam, cfg, Omega0);
    return r.run(on_sample);
}

}  // namespace burgers
