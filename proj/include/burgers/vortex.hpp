#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "biot_savart.hpp"
#include "fd.hpp"
#include "fields.hpp"
#include "semigroup.hpp"

namespace burgers {

// G_lambda(x) = sqrt(1-lambda^2)/(4 pi) exp(-((1+lambda) x1^2 + (1-lambda) x2^2)/4)
struct GaussianProfile {
    double lambda = 0.0;

    double value(double x1, double x2) const {
        const double a1 = 1.0 + lambda, a2 = 1.0 - lambda;
        return std::sqrt(a1 * a2) / (4.0 * std::numbers::pi) * std::exp(-(a1 * x1 * x1 + a2 * x2 * x2) / 4.0);
    }
    double d1(double x1, double x2) const { return -0.5 * (1.0 + lambda) * x1 * value(x1, x2); }
    double d2(double x1, double x2) const { return -0.5 * (1.0 - lambda) * x2 * value(x1, x2); }
    Field2D sample(const Grid2D& g) const {
        return Field2D::sample(g, [&](double x1, double x2) { return value(x1, x2); });
    }
};

inline GaussianProfile gaussian_profile(double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("gaussian_profile: lambda must lie in [0,1)");
    return {lambda};
}

struct VortexParams {
    double lambda = 0.0;
    double rho = 0.0;
    double m = 2.0;

    void validate() const {
        if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0,1)");
        if (!std::isfinite(rho)) throw std::invalid_argument("rho must be finite");
        if (!(m > 1.5)) throw std::invalid_argument("m must exceed 3/2");
    }
    AlphaPair alphas() const { return AlphaPair::from_lambda(lambda); }
};

struct VortexOptions {
    double tol = 1e-9;
    int max_iter = 200;
    bool derivatives = true;
    double h_rho = 0.0;  // 0: max(1e-3, 1e-2 |rho|)
};

struct VortexSolution {
    VortexParams params;
    Grid2D grid;
    Field2D omega_core;
    Field2D Omega_B;
    Velocity2D U_B;
    Field2D dOmega_drho, d2Omega_drho2;
    double residual = 0.0;
    int iterations = 0;
    double contraction_estimate = 0.0;
    std::vector<double> updates;  // ||omega_k - omega_{k-1}||_{L2(m)}
    std::vector<double> ratios;   // updates[k+1] / updates[k] above the round-off floor
    bool converged = false;
    std::string warning;
};

class VortexSolveError : public std::runtime_error {
public:
    VortexSolveError(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

namespace detail {

struct VortexContext {
    VortexParams params;
    AlphaPair ap;
    Field2D G;
    Velocity2D Vbar;

    VortexContext(const VortexParams& p, const Grid2D& g)
        : params(p), ap(p.alphas()), G(gaussian_profile(p.lambda).sample(g)), Vbar(biot_savart_2d(G)) {}

    Field2D map(const Field2D& omega) const {
        const double rho = params.rho;
        Velocity2D u = biot_savart_2d(omega);
        Field2D Om = omega;
        Om.axpy(rho, G);
        Field2D g1 = u.u1, g2 = u.u2;
        g1.axpy(rho, Vbar.u1);
        g2.axpy(rho, Vbar.u2);
        auto& a = g1.values();
        auto& b = g2.values();
        const auto& o = Om.values();
        for (std::size_t q = 0; q < a.size(); ++q) { a[q] *= o[q]; b[q] *= o[q]; }
        return resolvent_apply_div(ap, g1, g2, params.m).value;
    }
};

}  // namespace detail

// F(omega) = (L_perp + lambda M)^{-1} div((rho Vbar + u)(rho G + omega)).
inline Field2D fixed_point_map(const VortexParams& params, const Field2D& omega) {
    params.validate();
    return detail::VortexContext(params, omega.grid()).map(omega);
}

// ||(L_perp + lambda M) Omega - U . grad Omega||_{L2(m)}
inline double vortex_pde_residual(const VortexParams& params, const Field2D& Omega, const Velocity2D& U) {
    Field2D r = apply_generator(params.alphas(), Omega);
    Field2D o1 = fd::d1(Omega), o2 = fd::d2(Omega);
    auto& rv = r.values();
    for (std::size_t q = 0; q < rv.size(); ++q)
        rv[q] -= U.u1.values()[q] * o1.values()[q] + U.u2.values()[q] * o2.values()[q];
    return norm_L2m(r, params.m);
}

namespace detail {

inline VortexSolution picard(const VortexParams& params, const Grid2D& grid, const VortexOptions& opt) {
    params.validate();
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_vortex: tol must be positive");
    if (opt.max_iter < 1) throw std::invalid_argument("solve_vortex: max_iter must be positive");
    VortexContext ctx(params, grid);
    VortexSolution s;
    s.params = params;
    s.grid = grid;
    s.omega_core = Field2D(grid);
    const double scale = std::abs(params.rho) * norm_L2m(ctx.G, params.m);
    if (params.rho == 0.0) {
        s.converged = true;
    } else {
        const double floor = 1e-13 * scale;
        Field2D omega(grid);
        for (int it = 1; it <= opt.max_iter; ++it) {
            Field2D next = ctx.map(omega);
            const double d = norm_L2m(next - omega, params.m);
            if (!s.updates.empty() && s.updates.back() > floor && d > floor) s.ratios.push_back(d / s.updates.back());
            s.updates.push_back(d);
            omega = std::move(next);
            s.iterations = it;
            if (!std::isfinite(d) || d > 1e6 * scale)
                throw VortexSolveError("solve_vortex: iteration diverged", s.updates);
            if (d <= opt.tol * scale) { s.converged = true; break; }
        }
        if (!s.converged) throw VortexSolveError("solve_vortex: no convergence within max_iter", s.updates);
        s.omega_core = std::move(omega);
    }
    for (double r : s.ratios) s.contraction_estimate = std::max(s.contraction_estimate, r);
    if (s.contraction_estimate >= 1.0) s.warning = "contraction estimate >= 1: outside the certified regime";
    s.Omega_B = s.omega_core;
    s.Omega_B.axpy(params.rho, ctx.G);
    Velocity2D u = biot_savart_2d(s.omega_core);
    s.U_B = Velocity2D{u.u1, u.u2};
    s.U_B.u1.axpy(params.rho, ctx.Vbar.u1);
    s.U_B.u2.axpy(params.rho, ctx.Vbar.u2);
    s.residual = vortex_pde_residual(params, s.Omega_B, s.U_B);
    s.dOmega_drho = Field2D(grid);
    s.d2Omega_drho2 = Field2D(grid);
    return s;
}

}  // namespace detail

inline double default_h_rho(double rho) { return std::max(1e-3, 1e-2 * std::abs(rho)); }

// Centered differences of Omega_B in rho from solves at rho +- h_rho.
inline std::pair<Field2D, Field2D> rho_derivatives(const VortexParams& params, const Grid2D& grid, const Field2D& Omega,
                                                   double h_rho, const VortexOptions& opt = {}) {
    if (!(h_rho > 0.0)) throw std::invalid_argument("rho_derivatives: h_rho must be positive");
    VortexOptions sub = opt;
    sub.derivatives = false;
    sub.tol = std::min(opt.tol, 1e-12);
    VortexParams pp = params, pm = params;
    pp.rho += h_rho;
    pm.rho -= h_rho;
    VortexSolution sp, sm;
    try {
        sp = detail::picard(pp, grid, sub);
        sm = detail::picard(pm, grid, sub);
    } catch (const VortexSolveError& e) {
        throw std::domain_error(std::string("rho_derivatives: rho +- h_rho outside the convergent range: ") + e.what());
    }
    Field2D d1 = sp.Omega_B - sm.Omega_B;
    d1 *= 0.5 / h_rho;
    Field2D d2 = sp.Omega_B + sm.Omega_B;
    d2.axpy(-2.0, Omega);
    d2 *= 1.0 / (h_rho * h_rho);
    return {d1, d2};
}

// Picard iteration from omega_0 = 0; stops when the L2(m) update falls below
// tol * |rho| ||G_lambda||_{L2(m)}.
inline VortexSolution solve_vortex(const VortexParams& params, const Grid2D& grid, const VortexOptions& opt = {}) {
    VortexSolution s = detail::picard(params, grid, opt);
    if (opt.derivatives) {
        if (params.rho == 0.0 && params.lambda == 0.0) {
            s.dOmega_drho = gaussian_profile(0.0).sample(grid);
        } else {
            // the center solve is repeated at the tighter tolerance used for the neighbours
            VortexOptions sub = opt;
            sub.tol = std::min(opt.tol, 1e-12);
            VortexSolution c = detail::picard(params, grid, sub);
            const double h = opt.h_rho > 0.0 ? opt.h_rho : default_h_rho(params.rho);
            auto [d1, d2] = rho_derivatives(params, grid, c.Omega_B, h, opt);
            s.dOmega_drho = std::move(d1);
            s.d2Omega_drho2 = std::move(d2);
        }
    }
    return s;
}

// Second-order Taylor model of rho' -> Omega_B(rho') around a solved vortex.
class VortexFamily {
public:
    VortexFamily() = default;
    explicit VortexFamily(const VortexSolution& s)
        : params_(s.params), grid_(s.grid), Om_(s.Omega_B), dOm_(s.dOmega_drho), d2Om_(s.d2Omega_drho2),
          U_(s.U_B), dU_(biot_savart_2d(s.dOmega_drho)), d2U_(biot_savart_2d(s.d2Omega_drho2)) {}

    const VortexParams& params() const { return params_; }
    const Grid2D& grid() const { return grid_; }
    double rho() const { return params_.rho; }
    double radius() const { return std::max(0.05, 0.5 * std::abs(params_.rho)); }
    bool in_range(double rho_prime) const { return std::abs(rho_prime - params_.rho) <= radius() * (1.0 + 1e-12); }
    void require(double rho_prime) const {
        if (!in_range(rho_prime))
            throw std::domain_error("VortexFamily: rho' = " + std::to_string(rho_prime) + " outside the valid range");
    }

    // writes Omega_B(rho') to out (size N*N)
    void omega_into(double rho_prime, double* out) const {
        require(rho_prime);
        const double d = rho_prime - params_.rho, c = 0.5 * d * d;
        const double *a = Om_.data(), *b = dOm_.data(), *e = d2Om_.data();
        for (std::size_t q = 0; q < grid_.size(); ++q) out[q] = a[q] + d * b[q] + c * e[q];
    }
    void d_omega_into(double rho_prime, double* out) const {
        require(rho_prime);
        const double d = rho_prime - params_.rho;
        const double *b = dOm_.data(), *e = d2Om_.data();
        for (std::size_t q = 0; q < grid_.size(); ++q) out[q] = b[q] + d * e[q];
    }
    Field2D omega(double rho_prime) const {
        Field2D r(grid_);
        omega_into(rho_prime, r.data());
        return r;
    }
    Field2D d_omega(double rho_prime) const {
        Field2D r(grid_);
        d_omega_into(rho_prime, r.data());
        return r;
    }
    const Field2D& d2_omega() const { return d2Om_; }
    Velocity2D velocity(double rho_prime) const {
        require(rho_prime);
        const double d = rho_prime - params_.rho, c = 0.5 * d * d;
        Velocity2D v = U_;
        v.u1.axpy(d, dU_.u1).axpy(c, d2U_.u1);
        v.u2.axpy(d, dU_.u2).axpy(c, d2U_.u2);
        return v;
    }

private:
    VortexParams params_;
    Grid2D grid_;
    Field2D Om_, dOm_, d2Om_;
    Velocity2D U_, dU_, d2U_;
};

}  // namespace burgers
