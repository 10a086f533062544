#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "axial.hpp"
#include "biot_savart.hpp"
#include "fields.hpp"
#include "perturbation.hpp"
#include "semigroup.hpp"
#include "vortex.hpp"

namespace burgers::checks {

// ---- Biot-Savart -------------------------------------------------------------

struct ProfileRow {
    double r, numeric, analytic, rel_error;
};

inline double g0_speed(double r) { return -std::expm1(-r * r / 4.0) / (2.0 * std::numbers::pi * r); }

// Speed of the velocity of G_0 at every grid point with rmin <= r <= rmax, sorted by r.
inline std::vector<ProfileRow> g0_profile_rows(const Grid2D& g, double rmin = 0.25, double rmax = 6.0) {
    Velocity2D v = biot_savart_2d(gaussian_profile(0.0).sample(g));
    std::vector<ProfileRow> rows;
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) {
            const double r = std::hypot(g.x(i), g.x(j));
            if (r < rmin || r > rmax) continue;
            const double num = std::hypot(v.u1(i, j), v.u2(i, j)), ex = g0_speed(r);
            rows.push_back({r, num, ex, std::abs(num - ex) / ex});
        }
    std::sort(rows.begin(), rows.end(), [](const ProfileRow& a, const ProfileRow& b) { return a.r < b.r; });
    return rows;
}

inline double max_rel_error(const std::vector<ProfileRow>& rows) {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.rel_error);
    return m;
}

// x3-independent (0, 0, G_0): max |u_3D - u_2D| over the interior two-thirds,
// relative to max |u_2D|.
inline double bs3d_consistency(const Grid3D& g) {
    const Field2D G = gaussian_profile(0.0).sample(g.perp);
    Velocity3D v = biot_savart_3d_axial(SlicedField3D::outer(g, std::vector<double>(g.N3, 1.0), G));
    Velocity2D w = biot_savart_2d(G);
    SlicedField3D d(g);
    double ref = 0.0;
    for (int k = 0; k < g.N3; ++k)
        for (int i = 0; i < g.perp.N; ++i)
            for (int j = 0; j < g.perp.N; ++j) {
                d(k, i, j) = std::hypot(v.u1(k, i, j) - w.u1(i, j), v.u2(k, i, j) - w.u2(i, j), v.u3(k, i, j));
                ref = std::max(ref, std::hypot(w.u1(i, j), w.u2(i, j)));
            }
    return interior_sup(d) / ref;
}

// ---- semigroup ---------------------------------------------------------------

// sum of three Gaussians with seeded centres, widths and signs, projected to zero mean
inline Field2D random_mean_free(const Grid2D& g, const Field2D& profile, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-3.0, 3.0), w(0.5, 2.0), a(-1.0, 1.0);
    Field2D f(g);
    for (int b = 0; b < 3; ++b) {
        const double c1 = c(rng), c2 = c(rng), s2 = w(rng), amp = a(rng);
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j) {
                const double x1 = g.x(i) - c1, x2 = g.x(j) - c2;
                f(i, j) += amp * std::exp(-(x1 * x1 + x2 * x2) / (2.0 * s2));
            }
    }
    return project_zero_mean(f, profile);
}

struct SemigroupStats {
    double lambda = 0.0;
    std::vector<double> times;
    double max_mass_rel = 0.0;          // |int S_t f - int f| / int |f|
    std::vector<double> max_ratio;      // per time: max over samples of e^{(1-lambda)t/2} ||S_t f|| / ||f||
    double C = 0.0;                     // max over samples and times
    int samples = 0;
};

inline SemigroupStats semigroup_mass_decay(double lambda, const Grid2D& g, int samples, const std::vector<double>& times,
                                           std::uint64_t seed, double m = 2.0) {
    const AlphaPair ap = AlphaPair::from_lambda(lambda);
    const Field2D prof = invariant_profile(ap, g);
    std::mt19937_64 rng(seed);
    SemigroupStats s;
    s.lambda = lambda;
    s.times = times;
    s.samples = samples;
    s.max_ratio.assign(times.size(), 0.0);
    for (int n = 0; n < samples; ++n) {
        Field2D f = random_mean_free(g, prof, rng);
        const double l1 = norm_Lpm(f, 0.0, 1.0), mass0 = transverse_integral(f), nf = norm_L2m(f, m);
        for (std::size_t q = 0; q < times.size(); ++q) {
            Field2D u = apply_sg_2d(ap, times[q], f);
            s.max_mass_rel = std::max(s.max_mass_rel, std::abs(transverse_integral(u) - mass0) / l1);
            const double r = std::exp(0.5 * (1.0 - lambda) * times[q]) * norm_L2m(u, m) / nf;
            s.max_ratio[q] = std::max(s.max_ratio[q], r);
        }
    }
    for (double r : s.max_ratio) s.C = std::max(s.C, r);
    return s;
}

// ---- axial mode --------------------------------------------------------------

inline std::vector<std::pair<std::string, AxialProfile>> phi_test_profiles(int n, double L = 8.0) {
    std::vector<std::pair<std::string, AxialProfile>> p;
    p.emplace_back("gaussian", AxialProfile::sample(L, n, [](double x) { return std::exp(-x * x); },
                                                    [](double x) { return -2.0 * x * std::exp(-x * x); }));
    p.emplace_back("sine", AxialProfile::sample(L, n, [](double x) { return std::sin(x); },
                                                [](double x) { return std::cos(x); }));
    p.emplace_back("tanh", AxialProfile::sample(L, n, [](double x) { return std::tanh(x); },
                                                [](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }));
    p.emplace_back("linear", AxialProfile::sample(L, n, [L](double x) { return x / L; },
                                                  [L](double) { return 1.0 / L; }));
    p.emplace_back("two-bumps",
                   AxialProfile::sample(L, n, [](double x) {
                       return std::exp(-2.0 * (x - 1.0) * (x - 1.0)) - 0.5 * std::exp(-(x + 2.0) * (x + 2.0));
                   }));
    return p;
}

struct PhiOracleStats {
    double sup_diff = 0.0;  // gaussian profile, closed form vs FD
    bool bounds_ok = true;
    std::vector<std::string> failures;
};

inline PhiOracleStats phi_oracle_check(int n = 1024, double t = 1.0, const std::vector<double>& bound_times = {0.5, 1.0, 2.0}) {
    PhiOracleStats s;
    auto profiles = phi_test_profiles(n);
    {
        const AxialProfile& g = profiles.front().second;
        AxialProfile e = phi_evolve_exact(g, t), f = phi_evolve_fd(g, t);
        for (int k = 0; k < n; ++k) s.sup_diff = std::max(s.sup_diff, std::abs(e.values[k] - f.values[k]));
    }
    for (const auto& [name, p] : profiles)
        for (double tb : bound_times) {
            const SupEstimates se = sup_estimates(p, phi_evolve_exact(p, tb), tb);
            const SupEstimates sf = sup_estimates(p, phi_evolve_fd(p, tb), tb);
            if (!se.all()) s.failures.push_back(name + " exact t=" + std::to_string(tb));
            if (!sf.all()) s.failures.push_back(name + " fd t=" + std::to_string(tb));
        }
    s.bounds_ok = s.failures.empty();
    return s;
}

// ---- vortex ------------------------------------------------------------------

struct RemainderRow {
    double lambda, rho, correction_norm, ratio, residual;
    int iterations;
    double contraction;
    std::vector<double> ratios;
};

// ||Omega_B - rho G_lambda||_{L2(m)} and its ratio to rho^2
inline RemainderRow vortex_remainder(double lambda, double rho, const Grid2D& g, double m = 2.0, double tol = 1e-9) {
    VortexOptions o;
    o.tol = tol;
    o.derivatives = false;
    VortexSolution s = solve_vortex({lambda, rho, m}, g, o);
    const double c = norm_L2m(s.omega_core, m);
    return {lambda, rho, c, rho != 0.0 ? c / (rho * rho) : 0.0, s.residual, s.iterations, s.contraction_estimate, s.ratios};
}

// ---- modulated velocity --------------------------------------------------------

struct GapStats {
    std::vector<double> eps, gaps;
    double exponent = 0.0;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a; sy += b; sxx += a * a; sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// sup gap between the 3D velocity of Omega_B(rho + eps sin x3) e3 and the slice-wise U_B
inline GapStats gap_linearity(const VortexFamily& fam, const Grid3D& g, const std::vector<double>& eps) {
    GapStats s;
    s.eps = eps;
    for (double e : eps) {
        AxialProfile phi = AxialProfile::sample(g.L3, g.N3, [e](double x) { return e * std::sin(x); },
                                                [e](double x) { return e * std::cos(x); });
        s.gaps.push_back(modulated_vortex_velocity(fam, g, fam.rho(), phi).sup_gap);
    }
    s.exponent = loglog_slope(s.eps, s.gaps);
    return s;
}

// ---- battery -----------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Check {
    std::string name;
    std::function<CheckResult()> run;
};

inline std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

// The invariant battery at a given transverse/axial resolution.
inline std::vector<Check> battery(int N_perp = 128, int N_3 = 64) {
    const Grid2D g2(12.0, N_perp);
    const Grid3D g3(g2, 8.0, N_3);
    std::vector<Check> c;
    c.push_back({"spectrum", [] {
                     CheckResult r{"spectrum"};
                     bool ok = true;
                     for (int n = 0; n <= 2; ++n) {
                         SpectrumResult s = spectrum_check(1.0, n);
                         ok = ok && (n == 0 ? std::abs(s.fitted_rate) <= 1e-3 : s.rel_error <= 0.02);
                         r.detail += "n=" + std::to_string(n) + " rate=" + num(s.fitted_rate) + " ";
                     }
                     r.pass = ok;
                     return r;
                 }});
    c.push_back({"mass", [g2] {
                     CheckResult r{"mass"};
                     double worst = 0.0;
                     for (double lam : {0.0, 0.5})
                         worst = std::max(worst, semigroup_mass_decay(lam, g2, 50, {0.5, 1.0, 2.0, 4.0}, 7).max_mass_rel);
                     r.pass = worst <= 1e-10;
                     r.detail = "max relative mass change " + num(worst);
                     return r;
                 }});
    c.push_back({"biot-savart", [g2] {
                     CheckResult r{"biot-savart"};
                     const double e = max_rel_error(g0_profile_rows(g2));
                     r.pass = e <= 1e-3;
                     r.detail = "G0 azimuthal speed max rel error " + num(e);
                     return r;
                 }});
    c.push_back({"biot-savart-3d", [g3] {
                     CheckResult r{"biot-savart-3d"};
                     const double e = bs3d_consistency(g3);
                     r.pass = e <= 1e-3;
                     r.detail = "x3-independent column vs 2D law, rel " + num(e);
                     return r;
                 }});
    c.push_back({"phi-oracle", [] {
                     CheckResult r{"phi-oracle"};
                     PhiOracleStats s = phi_oracle_check();
                     r.pass = s.sup_diff <= 1e-4 && s.bounds_ok;
                     r.detail = "sup diff " + num(s.sup_diff) + (s.bounds_ok ? ", bounds hold" : ", bound failures");
                     for (const auto& f : s.failures) r.detail += "; " + f;
                     return r;
                 }});
    c.push_back({"phi-shift", [] {
                     CheckResult r{"phi-shift"};
                     AxialProfile p = AxialProfile::sample(8.0, 64, [](double x) { return 0.02 * std::exp(-x * x); });
                     const double d = shift_delta_rho(p), ex = 0.02 / std::sqrt(3.0);
                     r.pass = std::abs(d - ex) <= 1e-9 * ex;
                     r.detail = "delta_rho " + num(d);
                     return r;
                 }});
    c.push_back({"vortex-symmetric", [g2] {
                     CheckResult r{"vortex-symmetric"};
                     RemainderRow s = vortex_remainder(0.0, 0.3, g2);
                     r.pass = s.correction_norm <= 1e-6;
                     r.detail = "||omega|| " + num(s.correction_norm);
                     return r;
                 }});
    c.push_back({"contraction", [g2] {
                     CheckResult r{"contraction"};
                     RemainderRow s = vortex_remainder(0.5, 0.2, g2);
                     r.pass = s.contraction <= 0.75;
                     r.detail = "max update ratio " + num(s.contraction);
                     return r;
                 }});
    return c;
}

inline std::vector<CheckResult> run_battery(const std::vector<Check>& checks, const std::set<std::string>& only = {}) {
    std::vector<CheckResult> out;
    for (const auto& c : checks) {
        if (!only.empty() && !only.count(c.name)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.name = c.name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(r);
    }
    return out;
}

}  // namespace burgers::checks
