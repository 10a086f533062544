#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "burgers/perturbation.hpp"
#include "burgers/scenarios.hpp"

using namespace burgers;

namespace {

const Grid3D kGrid(Grid2D(12.0, 32), 8.0, 16);

const VortexFamily& family(double lambda, double rho) {
    static std::map<std::pair<double, double>, VortexFamily> cache;
    auto key = std::make_pair(lambda, rho);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, VortexFamily(solve_vortex({lambda, rho, 2.0}, kGrid.perp))).first;
    return it->second;
}

Triple zero() { return Triple{SlicedField3D(kGrid), SlicedField3D(kGrid), SlicedField3D(kGrid)}; }

Triple random_triple(std::uint64_t seed, double amp) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-2, 2);
    Triple w = zero();
    for (int i = 0; i < 3; ++i) {
        const double a = c(rng), b = c(rng), z = c(rng);
        for (int k = 0; k < kGrid.N3; ++k)
            for (int p = 0; p < kGrid.perp.N; ++p)
                for (int q = 0; q < kGrid.perp.N; ++q) {
                    const double x = kGrid.perp.x(p) - a, y = kGrid.perp.x(q) - b, s = kGrid.x3(k) - z;
                    w[i](k, p, q) = amp * std::exp(-(x * x + y * y) / 2 - s * s / 2) * (1 + 0.3 * x);
                }
    }
    project_zero_mean_slices(w[2], gaussian_profile(0.0).sample(kGrid.perp));
    return w;
}

double tmax(const Triple& w) {
    return std::max({max_abs(w[0].values()), max_abs(w[1].values()), max_abs(w[2].values())});
}

double max_slice_integral(const SlicedField3D& f) {
    double m = 0.0;
    for (double v : slice_integrals(f)) m = std::max(m, std::abs(v));
    return m;
}

Triple shifted_vortex(const VortexFamily& fam, const std::vector<double>& rho) {
    Triple O = zero();
    for (int k = 0; k < kGrid.N3; ++k) fam.omega_into(rho[k], O[2].slice_data(k));
    return O;
}

}  // namespace

TEST(DecomposeInitial, ExactVortex) {
    const auto& fam = family(0.5, 0.1);
    auto [phi, w] = decompose_initial(shifted_vortex(fam, std::vector<double>(16, 0.1)), fam, 0.1);
    // circulation lost to the box edge is about rho * 2e-9
    EXPECT_LE(max_abs(phi.values), 1e-9);
    EXPECT_LE(tmax(w), 1e-12);
}

TEST(DecomposeInitial, UniformShift) {
    const auto& fam = family(0.5, 0.1);
    auto [phi, w] = decompose_initial(shifted_vortex(fam, std::vector<double>(16, 0.13)), fam, 0.1);
    for (double v : phi.values) EXPECT_NEAR(v, 0.03, 1e-9);
    EXPECT_LE(tmax(w), 1e-9);
}

TEST(DecomposeInitial, AddedMeanFreePerturbation) {
    const auto& fam = family(0.5, 0.1);
    Triple g = random_triple(3, 1e-3);
    project_zero_mean_slices(g[2], invariant_profile(AlphaPair::from_lambda(0.5), kGrid.perp));
    Triple O = shifted_vortex(fam, std::vector<double>(16, 0.1));
    for (int i = 0; i < 3; ++i) O[i] += g[i];
    auto [phi, w] = decompose_initial(O, fam, 0.1);
    EXPECT_LE(max_abs(phi.values), 1e-9);
    for (int i = 0; i < 3; ++i) EXPECT_LE(max_abs((w[i] - g[i]).values()), 1e-9);
}

TEST(Terms, ZeroPerturbationGivesZero) {
    const auto& fam = family(0.5, 0.1);
    AxialProfile phi = AxialProfile::sample(8.0, 16, [](double x) { return 0.01 * std::sin(x); });
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.1, phi);
    Triple z = zero();
    Velocity3D u = biot_savart_3d(z);
    EXPECT_EQ(tmax(term_P(mv, z, u)), 0.0);
    EXPECT_EQ(tmax(term_N(z, u)), 0.0);
}

TEST(Terms, NoVortexGivesZeroP) {
    const auto& fam = family(0.0, 0.0);
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.0, AxialProfile::constant(8.0, 16, 0.0));
    Triple w = random_triple(4, 1e-2);
    EXPECT_EQ(tmax(term_P(mv, w, biot_savart_3d(w))), 0.0);
}

TEST(Terms, ThirdComponentIsMeanFree) {
    const auto& fam = family(0.5, 0.1);
    AxialProfile phi = AxialProfile::sample(8.0, 16, [](double x) { return 0.02 * std::exp(-x * x); });
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.1, phi);
    for (std::uint64_t s : {1, 2, 3}) {
        Triple w = random_triple(s, 1e-2);
        Velocity3D u = biot_savart_3d(w);
        Triple P = term_P(mv, w, u), N = term_N(w, u);
        EXPECT_LE(max_slice_integral(P[2]), 1e-6 * max_abs(P[2].values()));
        EXPECT_LE(max_slice_integral(N[2]), 1e-6 * max_abs(N[2].values()));
    }
}

TEST(Terms, NonlinearTermIsQuadratic) {
    Triple w = random_triple(7, 1e-2), h = w;
    for (auto& c : h) c *= 0.5;
    Triple a = term_N(w, biot_savart_3d(w)), b = term_N(h, biot_savart_3d(h));
    for (int i = 0; i < 3; ++i) {
        SlicedField3D d = b[i];
        d.axpy(-0.25, a[i]);
        EXPECT_LE(max_abs(d.values()), 1e-10 * max_abs(a[i].values()));
    }
}

TEST(Terms, ConstantPhiGivesNoForcing) {
    const auto& fam = family(0.5, 0.1);
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.1, AxialProfile::constant(8.0, 16, 0.02));
    EXPECT_LE(tmax(term_H(mv)), 1e-14);
}

TEST(Terms, SymmetricVortexHasNoCurvatureTerm) {
    const auto& fam = family(0.0, 0.1);
    AxialProfile phi = AxialProfile::sample(8.0, 16, [](double x) { return 0.02 * std::sin(x); });
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.1, phi);
    ModulatedVortex asym = modulated_vortex(family(0.5, 0.1), kGrid, 0.1, phi);
    EXPECT_LE(max_abs(mv.d2Omega.values()), 1e-2 * max_abs(asym.d2Omega.values()));
}

TEST(Terms, ForcingLinearInSlope) {
    const auto& fam = family(0.5, 0.1);
    auto comp = [&](double eps) {
        AxialProfile phi = AxialProfile::sample(8.0, 16, [eps](double x) { return eps * std::sin(x); },
                                                [eps](double x) { return eps * std::cos(x); });
        Triple H = term_H(modulated_vortex(fam, kGrid, 0.1, phi));
        return std::max(max_abs(H[0].values()), max_abs(H[1].values()));
    };
    const double a = comp(0.02), b = comp(0.01), c = comp(0.005);
    EXPECT_NEAR(b / a, 0.5, 0.05);
    EXPECT_NEAR(c / b, 0.5, 0.05);
}

TEST(Terms, CombinedFormEqualsSum) {
    const auto& fam = family(0.5, 0.1);
    AxialProfile phi = AxialProfile::sample(8.0, 16, [](double x) { return 0.02 * std::exp(-x * x); });
    phi.deriv = phi.derivative();
    ModulatedVortex mv = modulated_vortex(fam, kGrid, 0.1, phi);
    Triple w = random_triple(5, 1e-2);
    Velocity3D u = biot_savart_3d(w);
    Triple F = rhs_F(mv, w, u), P = term_P(mv, w, u), N = term_N(w, u), H = term_H(mv);
    for (int i = 0; i < 3; ++i) {
        SlicedField3D s = P[i] + N[i] + H[i];
        EXPECT_LE(max_abs((F[i] - s).values()), 1e-12 * max_abs(s.values()));
    }
}

TEST(DuhamelStep, EquilibriaAreSteady) {
    for (double c : {0.0, 0.02}) {
        const auto& fam = family(0.5, 0.1);
        EvolutionConfig cfg;
        cfg.params = {0.5, 0.1, 2.0};
        cfg.grid = kGrid;
        cfg.dt = 0.05;
        cfg.T = 0.05;
        EvolutionState s{0.0, 0, AxialProfile::constant(8.0, 16, c), zero()};
        EvolutionState n = duhamel_step(fam, cfg, s.phi, s);
        EXPECT_LE(tmax(n.omega), 1e-14);
        for (double v : n.phi.values) EXPECT_NEAR(v, c, 1e-14);
        EXPECT_NEAR(n.t, 0.05, 1e-15);
    }
}

TEST(RunEvolution, ExactVortexStaysPut) {
    const auto& fam = family(0.5, 0.1);
    EvolutionConfig cfg;
    cfg.params = {0.5, 0.1, 2.0};
    cfg.grid = kGrid;
    cfg.dt = 0.05;
    cfg.T = 0.5;
    cfg.sample_every = 2;
    EvolutionResult r = run_evolution(fam, cfg, shifted_vortex(fam, std::vector<double>(16, 0.1)));
    for (const auto& d : r.series) {
        EXPECT_LE(d.omega_norm, 1e-12);
        EXPECT_LE(d.dev_norm, 1e-12);
        EXPECT_NEAR(d.circ_mean, 0.1, 1e-8);
    }
    EXPECT_EQ(r.series.size(), 6u);
}

TEST(RunEvolution, TinyPerturbationFollowsLinearSemigroup) {
    const auto& fam = family(0.5, 0.0);
    EvolutionConfig cfg;
    cfg.params = {0.5, 0.0, 2.0};
    cfg.grid = kGrid;
    cfg.dt = 0.05;
    cfg.T = 1.0;
    cfg.sample_every = 4;
    cfg.fit_t0 = 0.0;
    const Field2D prof = invariant_profile(AlphaPair::from_lambda(0.5), kGrid.perp);
    Triple w = random_triple(8, 1e-8);
    project_zero_mean_slices(w[2], prof);
    EvolutionResult r = run_evolution(fam, cfg, w);
    // same steps with the linear propagator alone
    Triple lin = w;
    for (int s = 0; s < cfg.steps(); ++s) {
        lin = apply_strained_semigroup(0.5, cfg.dt, lin);
        project_zero_mean_slices(lin[2], prof);
    }
    Triple d = r.final_state.omega;
    for (int i = 0; i < 3; ++i) d[i] -= lin[i];
    EXPECT_LE(xnorm(d, 2.0), 1e-6 * xnorm(lin, 2.0));
    // decay of the third component against the one-shot semigroup on the same data
    const double n0 = norm_X2m(w[2], 2.0);
    const double run_rate = -std::log(norm_X2m(r.final_state.omega[2], 2.0) / n0);
    const double sg_rate = -std::log(norm_X2m(apply_sg_3d(AlphaPair::from_lambda(0.5), 1.0, w[2]), 2.0) / n0);
    EXPECT_NEAR(run_rate, sg_rate, 0.02 * sg_rate);
}

TEST(RunEvolution, ZeroFinalTimeGivesImmediateSummary) {
    const auto& fam = family(0.0, 0.1);
    EvolutionConfig cfg;
    cfg.params = {0.0, 0.1, 2.0};
    cfg.grid = kGrid;
    cfg.T = 0.0;
    EvolutionResult r = run_evolution(fam, cfg, shifted_vortex(fam, std::vector<double>(16, 0.1)));
    EXPECT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.final_state.step, 0);
}

TEST(RunEvolution, RejectsBadConfig) {
    const auto& fam = family(0.0, 0.1);
    EvolutionConfig cfg;
    cfg.params = {0.0, 0.1, 2.0};
    cfg.grid = kGrid;
    cfg.dt = 0.03;
    cfg.T = 0.1;
    EXPECT_THROW(run_evolution(fam, cfg, zero()), std::invalid_argument);
}
