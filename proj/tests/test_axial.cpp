#include <gtest/gtest.h>

#include <cmath>

#include "burgers/axial.hpp"
#include "burgers/checks.hpp"

using namespace burgers;

namespace {

AxialProfile line(int n = 256) { return AxialProfile::sample(8.0, n, [](double x) { return x; }, [](double) { return 1.0; }); }

double interior_err(const AxialProfile& p, const std::function<double(double)>& f, double a = 4.0) {
    double m = 0.0;
    for (int k = 0; k < p.N3; ++k)
        if (std::abs(p.x(k)) <= a) m = std::max(m, std::abs(p.values[k] - f(p.x(k))));
    return m;
}

}  // namespace

TEST(PhiExact, ConstantIsPreserved) {
    AxialProfile c = AxialProfile::constant(8.0, 64, 0.3);
    AxialProfile e = phi_evolve_exact(c, 1.5);
    for (double v : e.values) EXPECT_NEAR(v, 0.3, 1e-14);
    for (double v : e.deriv) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(PhiExact, LinearProfileContracts) {
    for (double t : {0.5, 1.0, 2.0}) {
        AxialProfile e = phi_evolve_exact(line(), t);
        EXPECT_LE(interior_err(e, [t](double x) { return x * std::exp(-t); }), 1e-10);
    }
}

TEST(PhiExact, OddStaysOdd) {
    AxialProfile p = AxialProfile::sample(8.0, 128, [](double x) { return std::tanh(x) * std::exp(-x * x / 8); });
    AxialProfile e = phi_evolve_exact(p, 0.7);
    for (int k = 0; k < 128; ++k) EXPECT_NEAR(e.values[k], -e.values[127 - k], 1e-15);
}

TEST(PhiFd, ConstantAndLinear) {
    AxialProfile f = phi_evolve_fd(AxialProfile::constant(8.0, 128, -0.2), 1.0);
    for (double v : f.values) EXPECT_NEAR(v, -0.2, 1e-13);
    AxialProfile l = phi_evolve_fd(line(), 1.0);
    EXPECT_LE(interior_err(l, [](double x) { return x * std::exp(-1.0); }), 1e-3);
}

TEST(PhiFd, GaussianAgreesWithClosedForm) {
    EXPECT_LE(checks::phi_oracle_check(1024, 1.0, {}).sup_diff, 1e-4);
}

TEST(PhiFd, RejectsUnstableStep) {
    AxialProfile p = line(256);
    EXPECT_THROW(phi_evolve_fd(p, 1.0, 10 * phi_fd_max_dt(p)), std::invalid_argument);
}

TEST(SupEstimates, ConstantProfile) {
    SupEstimates s = sup_estimates(AxialProfile::constant(8.0, 64, -0.5), 1.0);
    EXPECT_NEAR(s.sup_phi, 0.5, 1e-14);
    EXPECT_NEAR(s.sup_dphi, 0.0, 1e-14);
    EXPECT_TRUE(s.all());
}

TEST(SupEstimates, SineAtSeveralTimes) {
    AxialProfile p = AxialProfile::sample(8.0, 512, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); });
    for (double t : {0.5, 1.0, 2.0}) EXPECT_TRUE(sup_estimates(p, t).all()) << "t = " << t;
}

TEST(SupEstimates, GradientDecaysMonotonically) {
    AxialProfile p = AxialProfile::sample(8.0, 512, [](double x) { return std::exp(-x * x); });
    double prev = INFINITY;
    for (double t : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
        const double s = sup_estimates(p, t).sup_dphi;
        EXPECT_LT(s, prev);
        prev = s;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(SupEstimates, FdSolutionsSatisfyBounds) {
    auto s = checks::phi_oracle_check(512, 1.0, {0.5, 1.0, 2.0});
    EXPECT_TRUE(s.bounds_ok);
}

TEST(Shift, Examples) {
    EXPECT_NEAR(shift_delta_rho(AxialProfile::constant(8.0, 64, 0.7)), 0.7, 1e-14);
    EXPECT_NEAR(shift_delta_rho(AxialProfile::sample(8.0, 64, [](double x) { return std::sin(x) + x * x * x; })), 0.0, 1e-14);
    EXPECT_NEAR(shift_delta_rho(AxialProfile::sample(8.0, 256, [](double x) { return x * x; })), 1.0, 1e-6);
    EXPECT_NEAR(shift_delta_rho(AxialProfile::sample(8.0, 64, [](double x) { return 0.02 * std::exp(-x * x); })),
                0.02 / std::sqrt(3.0), 1e-12);
}

TEST(Shift, LinearInProfile) {
    AxialProfile p = AxialProfile::sample(8.0, 64, [](double x) { return std::exp(-(x - 1) * (x - 1)); });
    AxialProfile q = AxialProfile::sample(8.0, 64, [](double x) { return -3.0 * std::exp(-(x - 1) * (x - 1)); });
    EXPECT_NEAR(shift_delta_rho(q), -3.0 * shift_delta_rho(p), 1e-14);
}

TEST(Shift, WarnsOnShortAxis) { EXPECT_FALSE(shift_delta_rho_report(AxialProfile::constant(4.0, 32, 1.0)).warning.empty()); }
