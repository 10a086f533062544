#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "burgers/checks.hpp"
#include "burgers/semigroup.hpp"
#include "burgers/vortex.hpp"

using namespace burgers;

namespace {

std::vector<double> sample1d(int n, double L, double (*f)(double)) {
    std::vector<double> v(n);
    const double h = 2 * L / n;
    for (int i = 0; i < n; ++i) v[i] = f(-L + (i + 0.5) * h);
    return v;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(SemigroupOneD, GaussianIsInvariant) {
    auto f = sample1d(256, 12.0, [](double x) { return std::exp(-x * x / 4); });
    for (double t : {0.3, 1.0, 3.0}) EXPECT_LE(sup_diff(apply_sg_1d(1.0, t, f, 12.0), f), 1e-6);
}

TEST(SemigroupOneD, FirstDerivativeDecaysAtHalfAlpha) {
    auto f = sample1d(256, 12.0, [](double x) { return -0.5 * x * std::exp(-x * x / 4); });
    auto g = apply_sg_1d(1.0, 1.0, f, 12.0);
    for (double& v : f) v *= std::exp(-0.5);
    EXPECT_LE(sup_diff(g, f), 1e-6);
}

TEST(SemigroupOneD, ZeroStaysZero) {
    std::vector<double> z(64, 0.0);
    EXPECT_EQ(max_abs(apply_sg_1d(2.0, 0.7, z, 12.0)), 0.0);
}

TEST(SemigroupTwoD, GaussianLambdaIsInvariant) {
    const Grid2D g(12.0, 128);
    const AlphaPair ap = AlphaPair::from_lambda(0.5);
    const Field2D G = gaussian_profile(0.5).sample(g);
    for (double t : {0.5, 2.0}) EXPECT_LE(max_abs((apply_sg_2d(ap, t, G) - G).values()), 1e-5 * max_abs(G.values()));
    EXPECT_EQ(max_abs(apply_sg_2d(ap, 1.0, Field2D(g)).values()), 0.0);
}

TEST(SemigroupTwoD, MeanFreeDecayWithOneConstant) {
    const Grid2D g(12.0, 64);
    for (double lam : {0.0, 0.5}) {
        auto s = checks::semigroup_mass_decay(lam, g, 10, {0.5, 1.0, 2.0, 4.0}, 11);
        EXPECT_LE(s.max_mass_rel, 1e-10);
        EXPECT_TRUE(std::isfinite(s.C));
        EXPECT_LT(s.C, 2.0);
    }
}

TEST(SemigroupTwoD, DivFormOutputIsMeanFree) {
    const Grid2D g(12.0, 64);
    const AlphaPair ap = AlphaPair::from_lambda(0.3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int s = 0; s < 5; ++s) {
        const double a = u(rng), b = u(rng);
        Field2D g1 = Field2D::sample(g, [&](double x, double y) { return std::exp(-(x - a) * (x - a) - (y - b) * (y - b)); });
        Field2D g2 = Field2D::sample(g, [&](double x, double y) { return x * std::exp(-(x * x + (y - a) * (y - a)) / 2); });
        EXPECT_NEAR(transverse_integral(apply_sg_2d_div(ap, 0.5, g1, g2)), 0.0, 1e-14);
    }
    EXPECT_EQ(max_abs(apply_sg_2d_div(ap, 0.5, Field2D(g), Field2D(g)).values()), 0.0);
}

TEST(SemigroupTwoD, DivFormSmallTimeGrowthBounded) {
    // ||S_t d1 g|| / ||g|| grows no faster than a1(t)^{-1/2-1/4}, p = 2
    const Grid2D g(12.0, 128);
    const AlphaPair ap = AlphaPair::from_lambda(0.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2, 2);
    Field2D zero(g);
    double worst = 0.0;
    for (int s = 0; s < 6; ++s) {
        const double a = u(rng), b = u(rng);
        Field2D g1 = Field2D::sample(g, [&](double x, double y) {
            return std::exp(-((x - a) * (x - a) + (y - b) * (y - b)) / 0.5) * (x > a ? 1.0 : -1.0);
        });
        for (double t : {0.01, 0.04, 0.16}) {
            const double r = norm_L2m(apply_sg_2d_div(ap, t, g1, zero), 2.0) / norm_L2m(g1, 2.0);
            worst = std::max(worst, r * std::pow(sg_a(ap.alpha1, t), 0.75));
        }
    }
    EXPECT_LT(worst, 10.0);
}

TEST(Resolvent, ZeroRhs) {
    const Grid2D g(12.0, 64);
    EXPECT_EQ(max_abs(resolvent_apply(AlphaPair::from_lambda(0.5), Field2D(g)).value.values()), 0.0);
}

TEST(Resolvent, RecoversManufacturedSolution) {
    const Grid2D g(12.0, 128);
    const AlphaPair ap = AlphaPair::from_lambda(0.5);
    Field2D u = project_zero_mean(Field2D::sample(g, [](double x, double y) {
                                      return (x + 0.5 * x * y) * std::exp(-(x * x + y * y) / 3.0);
                                  }),
                                  invariant_profile(ap, g));
    Field2D rhs = project_zero_mean(apply_generator(ap, u), invariant_profile(ap, g));
    ResolventResult r = resolvent_apply(ap, rhs);
    EXPECT_LE(norm_L2m(r.value - u, 2.0), 2e-3 * norm_L2m(u, 2.0));
}

TEST(Resolvent, DivFormMatchesPlainMode) {
    const Grid2D g(12.0, 128);
    const AlphaPair ap = AlphaPair::from_lambda(0.0);
    Field2D g1 = Field2D::sample(g, [](double x, double y) { return x * std::exp(-(x * x + y * y) / 4.0) / (4 * std::numbers::pi); });
    Field2D rhs = Field2D::sample(g, [](double x, double y) {
        return (1.0 - x * x / 2.0) * std::exp(-(x * x + y * y) / 4.0) / (4 * std::numbers::pi);
    });
    Field2D a = resolvent_apply_div(ap, g1, Field2D(g)).value;
    Field2D b = resolvent_apply(ap, project_zero_mean(rhs, invariant_profile(ap, g)), 2.0, 1e-6).value;
    EXPECT_LE(norm_L2m(a - b, 2.0), 1e-3 * norm_L2m(b, 2.0));
}

TEST(SemigroupThreeD, SlicesOfGaussianAreInvariant) {
    const Grid3D g(Grid2D(12.0, 64), 8.0, 16);
    const AlphaPair ap = AlphaPair::from_lambda(0.5);
    const Field2D G = gaussian_profile(0.5).sample(g.perp);
    SlicedField3D w = SlicedField3D::outer(g, std::vector<double>(16, 1.0), G);
    EXPECT_LE(max_abs((apply_sg_3d(ap, 1.0, w) - w).values()), 1e-4 * max_abs(G.values()));
    EXPECT_EQ(max_abs(apply_sg_3d(ap, 1.0, SlicedField3D(g)).values()), 0.0);
}

TEST(SemigroupThreeD, AxiallyConstantReducesToTwoD) {
    const Grid3D g(Grid2D(12.0, 64), 8.0, 16);
    const AlphaPair ap = AlphaPair::from_lambda(0.2);
    Field2D f = project_zero_mean(Field2D::sample(g.perp, [](double x, double y) { return std::exp(-(x - 1) * (x - 1) - y * y); }),
                                  invariant_profile(ap, g.perp));
    SlicedField3D w = SlicedField3D::outer(g, std::vector<double>(16, 1.0), f);
    SlicedField3D o = apply_sg_3d(ap, 0.8, w);
    Field2D ref = apply_sg_2d(ap, 0.8, f);
    for (int k = 0; k < g.N3; ++k) EXPECT_LE(max_abs((o.slice(k) - ref).values()), 1e-13);
}

TEST(SemigroupThreeD, DivVariants) {
    const Grid3D g(Grid2D(12.0, 32), 8.0, 16);
    const AlphaPair ap = AlphaPair::from_lambda(0.0);
    for (int axis : {1, 2, 3}) EXPECT_EQ(max_abs(apply_sg_3d_div(ap, 0.5, SlicedField3D(g), axis).values()), 0.0);
    Field2D f = gaussian_profile(0.0).sample(g.perp);
    SlicedField3D c = SlicedField3D::outer(g, std::vector<double>(16, 1.0), f);
    EXPECT_LE(max_abs(apply_sg_3d_div(ap, 0.5, c, 3).values()), 1e-14);
    EXPECT_THROW(apply_sg_3d_div(ap, 0.5, c, 4), std::invalid_argument);
}

TEST(SemigroupThreeD, AxialDerivativeBlowUpRate) {
    // ||S_t d3 g|| (1 - e^{-2t})^{1/2} stays bounded as t -> 0
    const Grid3D g(Grid2D(12.0, 32), 8.0, 256);
    const AlphaPair ap = AlphaPair::from_lambda(0.0);
    std::vector<double> ax(g.N3);
    for (int k = 0; k < g.N3; ++k) ax[k] = g.x3(k) > 0 ? 1.0 : -1.0;
    SlicedField3D w = SlicedField3D::outer(g, ax, gaussian_profile(0.0).sample(g.perp));
    std::vector<double> scaled;
    for (double t : {0.005, 0.02, 0.08}) scaled.push_back(norm_X2m(apply_sg_3d_div(ap, t, w, 3), 2.0) * std::sqrt(sg_c(t)));
    for (double s : scaled) EXPECT_LT(s, 2.0 * scaled.front());
    EXPECT_GT(scaled.front(), 0.0);
}

TEST(Spectrum, RatesMatchEigenvalues) {
    SpectrumResult r0 = spectrum_check(1.0, 0), r1 = spectrum_check(1.0, 1), r2 = spectrum_check(1.0, 2);
    EXPECT_LE(std::abs(r0.fitted_rate), 1e-3);
    EXPECT_NEAR(r1.fitted_rate, 0.5, 0.01);
    EXPECT_NEAR(r2.fitted_rate, 1.0, 0.02);
    EXPECT_THROW(spectrum_check(-1.0, 1), std::invalid_argument);
}
