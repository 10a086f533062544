#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "burgers/fields.hpp"
#include "burgers/vortex.hpp"

using namespace burgers;

namespace {

Field2D G0(const Grid2D& g) { return gaussian_profile(0.0).sample(g); }

}  // namespace

TEST(WeightB, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(weight_b(0.0, 0.0), 1.0);
    EXPECT_NEAR(weight_b(1.0, 0.0), 1.41421356, 1e-8);
    EXPECT_NEAR(weight_b(3.0, 4.0), std::sqrt(10.0) * std::sqrt(17.0), 1e-12);
    EXPECT_NEAR(weight_b(3.0, 4.0), 13.0384, 1e-4);
}

TEST(NormL2m, ZeroField) { EXPECT_EQ(norm_L2m(Field2D(Grid2D(12.0, 32)), 2.0), 0.0); }

TEST(NormL2m, GaussianUnweighted) {
    // int G0^2 = 1/(8 pi)
    EXPECT_NEAR(norm_L2m(G0(Grid2D(12.0, 128)), 0.0), 1.0 / std::sqrt(8.0 * std::numbers::pi), 1e-12);
}

TEST(NormL2m, BumpOutsideBoxTruncatesToZero) {
    Field2D f = Field2D::sample(Grid2D(12.0, 64), [](double x, double y) {
        return std::exp(-((x - 60.0) * (x - 60.0) + (y - 60.0) * (y - 60.0)));
    });
    EXPECT_EQ(norm_L2m(f, 2.0), 0.0);
}

TEST(NormL2m, MonotoneInM) {
    Field2D f = Field2D::sample(Grid2D(12.0, 64), [](double x, double y) { return std::exp(-(x - 1) * (x - 1) - y * y / 3); });
    double prev = 0.0;
    for (double m : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const double n = norm_L2m(f, m);
        EXPECT_GE(n, prev);
        prev = n;
    }
}

TEST(NormL2m, GridRefinementIsSecondOrderOrBetter) {
    auto f = [](double x, double y) { return std::exp(-(x * x + 2 * y * y) / 3.0) * (1 + x); };
    const double a = norm_L2m(Field2D::sample(Grid2D(12.0, 64), f), 2.0);
    const double b = norm_L2m(Field2D::sample(Grid2D(12.0, 128), f), 2.0);
    const double h = 24.0 / 64;
    EXPECT_LE(std::abs(a - b), h * h * std::abs(b));
}

TEST(NormL2m, RejectsNonFiniteAtConstruction) {
    Grid2D g(12.0, 16);
    std::vector<double> v(g.size(), 0.0);
    EXPECT_NO_THROW(Field2D(g, v));
    v[5] = std::nan("");
    EXPECT_THROW(Field2D(g, v), std::invalid_argument);
    Field2D f(g);
    f(2, 3) = INFINITY;
    EXPECT_THROW(norm_L2m(f, 2.0), std::invalid_argument);
}

TEST(NormLpm, Examples) {
    const Grid2D g(12.0, 128);
    EXPECT_EQ(norm_Lpm(Field2D(g), 1.0, 3.0), 0.0);
    EXPECT_NEAR(norm_Lpm(G0(g), 0.0, 1.0), 1.0, 1e-12);
    // weighted L1 norm of G0: two resolutions agree
    const double a = norm_Lpm(G0(Grid2D(12.0, 128)), 2.0, 1.0), b = norm_Lpm(G0(Grid2D(12.0, 256)), 2.0, 1.0);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, b, 1e-9 * b);
}

TEST(NormLpm, L1EmbeddingConstant) {
    const Grid2D g(12.0, 64);
    const double m = 2.0;
    // C = discrete ||b^{-m}||_{L2}
    Field2D binv = Field2D::sample(g, [m](double x, double y) { return std::pow(weight_b(x, y), -2.0 * m); });
    const double C = norm_L2m(binv, m);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int s = 0; s < 20; ++s) {
        const double c1 = u(rng), c2 = u(rng), w = 0.5 + std::abs(u(rng));
        Field2D f = Field2D::sample(g, [&](double x, double y) {
            return std::exp(-((x - c1) * (x - c1) + (y - c2) * (y - c2)) / w) * (x > c1 ? 1.0 : -0.5);
        });
        EXPECT_LE(norm_Lpm(f, 0.0, 1.0), C * norm_L2m(f, m) * (1 + 1e-12));
    }
}

TEST(NormX2m, Examples) {
    const Grid3D g(Grid2D(12.0, 64), 8.0, 6);
    EXPECT_EQ(norm_X2m(SlicedField3D(g), 2.0), 0.0);
    SlicedField3D w(g);
    w.set_slice(2, G0(g.perp));
    EXPECT_NEAR(norm_X2m(w, 0.0), 0.19947, 1e-5);
    SlicedField3D c(g);
    for (int k = 0; k < 3; ++k) c.set_slice(k, double(k + 1) * G0(g.perp));
    EXPECT_NEAR(norm_X2m(c, 2.0), 3.0 * norm_L2m(G0(g.perp), 2.0), 1e-14);
}

TEST(NormX2m, InvariantUnderSlicePermutation) {
    const Grid3D g(Grid2D(12.0, 32), 8.0, 5);
    SlicedField3D a(g), b(g);
    for (int k = 0; k < 5; ++k) {
        Field2D s = double(1 + (k * 3) % 5) * G0(g.perp);
        a.set_slice(k, s);
        b.set_slice(4 - k, s);
    }
    EXPECT_EQ(norm_X2m(a, 2.0), norm_X2m(b, 2.0));
    EXPECT_EQ(norm_X2m(a, 2.0), slice_norm_L2m(a, 3, 2.0));
}

TEST(TransverseIntegral, Examples) {
    const Grid2D g(12.0, 128);
    EXPECT_EQ(transverse_integral(Field2D(g)), 0.0);
    // box truncation of the e^{-alpha2 x2^2/4} tail
    EXPECT_NEAR(transverse_integral(gaussian_profile(0.5).sample(g)), 1.0, 1e-8);
    Field2D odd = Field2D::sample(g, [](double x, double y) { return x * std::exp(-(x * x + y * y)); });
    EXPECT_NEAR(transverse_integral(odd), 0.0, 1e-15);
}

TEST(ProjectZeroMean, Examples) {
    const Grid2D g(12.0, 64);
    const Field2D G = G0(g);
    Field2D odd = Field2D::sample(g, [](double x, double y) { return x * std::exp(-(x * x + y * y) / 2); });
    Field2D p = project_zero_mean(odd, G);
    for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(p.values()[q], odd.values()[q], 1e-15);
    EXPECT_LE(max_abs(project_zero_mean(G, G).values()), 1e-17);
    Field2D mix = 2.0 * G + odd;
    Field2D r = project_zero_mean(mix, G);
    for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(r.values()[q], odd.values()[q], 1e-15);
}

TEST(ProjectZeroMean, IdempotentAndLinear) {
    const Grid2D g(12.0, 64);
    const Field2D G = gaussian_profile(0.3).sample(g);
    Field2D a = Field2D::sample(g, [](double x, double y) { return std::exp(-(x - 1) * (x - 1) - y * y); });
    Field2D b = Field2D::sample(g, [](double x, double y) { return std::exp(-x * x / 2 - (y + 2) * (y + 2)); });
    Field2D pa = project_zero_mean(a, G);
    EXPECT_NEAR(transverse_integral(pa), 0.0, 1e-15);
    Field2D ppa = project_zero_mean(pa, G);
    for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(ppa.values()[q], pa.values()[q], 1e-16);
    Field2D lin = project_zero_mean(2.0 * a + 3.0 * b, G), sep = 2.0 * pa + 3.0 * project_zero_mean(b, G);
    for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(lin.values()[q], sep.values()[q], 1e-15);
}

TEST(ProjectZeroMean, RejectsZeroIntegralProfile) {
    const Grid2D g(12.0, 32);
    Field2D odd = Field2D::sample(g, [](double x, double) { return 0.0 * x; });
    EXPECT_THROW(project_zero_mean(G0(g), odd), std::invalid_argument);
}
