#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

// The reference implementations are checked against cases with closed forms.

TEST(Oracle, FloquetWithoutDrive) {
    EXPECT_NEAR(oracle::floquet_beta(0.09, 0.0), 0.3, 1e-10);
    EXPECT_NEAR(oracle::floquet_beta(0.5, 0.0), std::sqrt(0.5), 1e-10);
    EXPECT_LT(oracle::floquet_beta(-0.1, 0.0), 0.0);
}

TEST(Oracle, FloquetStabilityEdge) {
    // the a = 0 edge of the first region sits at q ~ 0.908
    EXPECT_GT(oracle::floquet_beta(0.0, 0.90), 0.0);
    EXPECT_LT(oracle::floquet_beta(0.0, 0.92), 0.0);
}

TEST(Oracle, IdealPotentialBoundaryValues) {
    const double r0 = 0.02, z0 = r0 / std::sqrt(2.0);
    EXPECT_DOUBLE_EQ(oracle::ideal_potential(r0, r0, 0, 0), 1.0);
    EXPECT_NEAR(oracle::ideal_potential(r0, 0, 0, z0), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(oracle::ideal_potential(r0, 0, 0, 0), 0.5);
}

TEST(Oracle, DirectDftFindsTone) {
    const int n = 2000;
    const double dt = 1e-6;
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = std::sin(2.0 * std::acos(-1.0) * 12.5e3 * i * dt);
    EXPECT_NEAR(oracle::dft_peak(s.data(), n, dt, 1e3, 40e3, 10.0), 12.5e3, 10.0);
}
