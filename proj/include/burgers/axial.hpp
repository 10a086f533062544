#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fd.hpp"
#include "fields.hpp"
#include "semigroup.hpp"

namespace burgers {

// phi(x3) on the cell-centered axis [-L3, L3]; clamped beyond the ends.
struct AxialProfile {
    double L3 = 8.0;
    int N3 = 64;
    std::vector<double> values;
    std::vector<double> deriv;  // optional samples of d3 phi

    AxialProfile() = default;
    AxialProfile(double L, int n, std::vector<double> v, std::vector<double> dv = {})
        : L3(L), N3(n), values(std::move(v)), deriv(std::move(dv)) {
        if (!(L3 > 0.0) || N3 < 1) throw std::invalid_argument("AxialProfile: invalid axis");
        if (int(values.size()) != N3) throw std::invalid_argument("AxialProfile: size mismatch");
        if (!deriv.empty() && int(deriv.size()) != N3) throw std::invalid_argument("AxialProfile: derivative size mismatch");
        detail::require_finite(values, "AxialProfile");
        detail::require_finite(deriv, "AxialProfile");
    }
    static AxialProfile sample(double L, int n, const std::function<double(double)>& f,
                               const std::function<double(double)>& df = {}) {
        std::vector<double> v(n), dv;
        const double h = 2.0 * L / n;
        for (int k = 0; k < n; ++k) v[k] = f(-L + (k + 0.5) * h);
        if (df) {
            dv.resize(n);
            for (int k = 0; k < n; ++k) dv[k] = df(-L + (k + 0.5) * h);
        }
        return AxialProfile(L, n, std::move(v), std::move(dv));
    }
    static AxialProfile constant(double L, int n, double c) { return AxialProfile(L, n, std::vector<double>(n, c)); }

    double h() const { return 2.0 * L3 / N3; }
    double x(int k) const { return -L3 + (k + 0.5) * h(); }
    std::vector<double> derivative() const {
        if (!deriv.empty()) return deriv;
        return fd::d_line(values, h());
    }
};

// phi(x3, t) = (G_t * phi0)(x3 e^{-t}); d3 phi = e^{-t} (d3 G_t * phi0)(x3 e^{-t}).
inline AxialProfile phi_evolve_exact(const AxialProfile& phi0, double t) {
    if (!(t > 0.0)) return phi0;
    auto A = axial_propagator(phi0.N3, phi0.L3, t);
    auto D = axial_propagator(phi0.N3, phi0.L3, t, true);
    std::vector<double> v = A->apply(phi0.values), dv = D->apply(phi0.values);
    const double e = std::exp(-t);
    for (double& a : dv) a *= e;
    return AxialProfile(phi0.L3, phi0.N3, std::move(v), std::move(dv));
}

inline double phi_fd_max_dt(const AxialProfile& p) {
    const double h = p.h();
    return std::min(0.5 * h * h, h / p.L3);
}

// Explicit scheme for d_t phi + x3 d_3 phi = d_3^2 phi: second-order upwind
// advection, centered diffusion. dt <= 0 picks 0.4 * min(h^2/2, h/L3).
inline AxialProfile phi_evolve_fd(const AxialProfile& phi0, double t, double dt = 0.0) {
    if (!(t > 0.0)) return phi0;
    const double dmax = phi_fd_max_dt(phi0);
    if (dt <= 0.0) dt = 0.4 * dmax;
    if (dt > dmax) throw std::invalid_argument("phi_evolve_fd: dt violates the stability limit");
    const int steps = int(std::ceil(t / dt - 1e-12));
    dt = t / steps;
    const int n = phi0.N3;
    if (n < 3) throw std::invalid_argument("phi_evolve_fd: need at least 3 points");
    const double h = phi0.h();
    std::vector<double> u = phi0.values, r(n);
    // outflow ends: ghost values by quadratic extrapolation
    auto at = [&](int k) {
        if (k < 0) return 3.0 * u[0] - 3.0 * u[1] + u[2];
        if (k >= n) return 3.0 * u[n - 1] - 3.0 * u[n - 2] + u[n - 3];
        return u[k];
    };
    for (int s = 0; s < steps; ++s) {
        for (int k = 0; k < n; ++k) {
            const double x = phi0.x(k);
            double adv;
            if (x > 0.0) {
                adv = k >= 2 ? (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * h) : (u[k] - at(k - 1)) / h;
            } else {
                adv = k <= n - 3 ? (-3.0 * u[k] + 4.0 * u[k + 1] - u[k + 2]) / (2.0 * h) : (at(k + 1) - u[k]) / h;
            }
            const double dif = (at(k + 1) - 2.0 * u[k] + at(k - 1)) / (h * h);
            r[k] = u[k] + dt * (dif - x * adv);
        }
        u.swap(r);
    }
    return AxialProfile(phi0.L3, n, std::move(u));
}

struct SupEstimates {
    double sup_phi = 0.0, sup_dphi = 0.0;
    double sup_phi0 = 0.0, sup_dphi0 = 0.0;
    double bound_max = 0.0, bound_grad = 0.0, bound_smooth = 0.0;
    bool ok_max = true, ok_grad = true, ok_smooth = true;
    bool all() const { return ok_max && ok_grad && ok_smooth; }
};

// Grid sup-norms of phi0 and of an evolved profile p = phi(t), and the three inequalities
//   |phi(t)| <= |phi0|,  |d3 phi(t)| <= e^{-t} |d3 phi0|,
//   |d3 phi(t)| <= e^{-t} (1 - e^{-2t})^{-1/2} |phi0|.
inline SupEstimates sup_estimates(const AxialProfile& phi0, const AxialProfile& p, double t, double rel_slack = 1e-9) {
    SupEstimates s;
    s.sup_phi0 = max_abs(phi0.values);
    s.sup_dphi0 = max_abs(phi0.derivative());
    s.sup_phi = max_abs(p.values);
    s.sup_dphi = max_abs(p.derivative());
    s.bound_max = s.sup_phi0;
    s.bound_grad = std::exp(-t) * s.sup_dphi0;
    s.bound_smooth = t > 0.0 ? std::exp(-t) / std::sqrt(sg_c(t)) * s.sup_phi0 : INFINITY;
    auto le = [&](double a, double b) { return a <= b * (1.0 + rel_slack) + 1e-14; };
    s.ok_max = le(s.sup_phi, s.bound_max);
    s.ok_grad = le(s.sup_dphi, s.bound_grad);
    s.ok_smooth = le(s.sup_dphi, s.bound_smooth);
    return s;
}

inline SupEstimates sup_estimates(const AxialProfile& phi0, double t, double rel_slack = 1e-9) {
    return sup_estimates(phi0, phi_evolve_exact(phi0, t), t, rel_slack);
}

struct ShiftResult {
    double delta_rho = 0.0;
    std::string warning;
};

// (2 pi)^{-1/2} int exp(-x^2/2) phi0, midpoint rule plus the exact tails of
// the clamped extension.
inline ShiftResult shift_delta_rho_report(const AxialProfile& phi0) {
    const double h = phi0.h();
    double s = 0.0;
    for (int k = 0; k < phi0.N3; ++k) {
        const double x = phi0.x(k);
        s += std::exp(-0.5 * x * x) * phi0.values[k];
    }
    s *= h;
    const double tail = std::sqrt(std::numbers::pi / 2.0) * std::erfc(phi0.L3 / std::numbers::sqrt2);
    s += tail * (phi0.values.front() + phi0.values.back());
    ShiftResult r{s / std::sqrt(2.0 * std::numbers::pi), {}};
    if (phi0.L3 < 8.0) r.warning = "L3 < 8: shift value not certified";
    return r;
}

inline double shift_delta_rho(const AxialProfile& phi0) { return shift_delta_rho_report(phi0).delta_rho; }

// phi0(x3) = int omega3 dx_perp per slice
inline AxialProfile axial_mode(const SlicedField3D& w3) {
    return AxialProfile(w3.grid().L3, w3.N3(), slice_integrals(w3));
}

inline double shift_delta_rho(const SlicedField3D& w3) { return shift_delta_rho(axial_mode(w3)); }

}  // namespace burgers
