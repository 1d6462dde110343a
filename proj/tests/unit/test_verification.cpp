#include "mussel/linear_analysis.hpp"
#include "mussel/oracle_suite.hpp"
#include "mussel/verification.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mussel;
using namespace mussel::verification;

namespace {

ModelParams section5() { return ModelParams({.r = 2.0, .alpha = 0.1, .gamma = 0.5, .d = 1.0, .tau = 0.0, .l = 1.0}); }

// Roots of γλ² + T λ + D for the discrete wave number of cos(n x / l) on the grid.
std::vector<cplx> exact_grid_spectrum(const ModelParams& p, const Grid& grid) {
    const Equilibrium e = positive_equilibrium(p);
    const double uptake = p.r() * p.r() * e.a * e.a * e.m;
    const double h = grid.spacing();
    std::vector<cplx> out;
    for (int n = 0; n <= grid.intervals(); ++n) {
        const double s = std::sin(n * h / (2.0 * p.l()));
        const double k2 = 4.0 / (h * h) * s * s;
        // J = [[uptake, r m*], [-a*, -(α + m*)]]
        const double j11 = uptake - p.d() * k2, j12 = p.r() * e.m, j21 = -e.a, j22 = -(p.alpha() + e.m) - k2;
        const double g = p.gamma();
        const double tr = j11 + j22 / g;
        const double det = (j11 * j22 - j12 * j21) / g;
        const cplx disc = std::sqrt(cplx(tr * tr - 4.0 * det));
        out.push_back(0.5 * (tr + disc));
        out.push_back(0.5 * (tr - disc));
    }
    return out;
}

} // namespace

TEST(EquilibriumOracle, AgreesWithClosedForm) {
    for (const double alpha : {0.05, 0.1, 0.3, 0.6, 0.9}) {
        for (const double frac : {0.01, 0.3, 0.7, 0.99}) {
            const double r = 1.0 + (1.0 / alpha - 1.0) * frac;
            const Equilibrium a = equilibrium_oracle(alpha, r);
            const Equilibrium b = positive_equilibrium(ModelParams({.r = r, .alpha = alpha}));
            EXPECT_NEAR(a.m, b.m, 1e-12 * std::max(1.0, b.m));
            EXPECT_NEAR(a.a, b.a, 1e-12);
        }
    }
}

TEST(DiscreteSpectrum, IsUnionOfModeSpectra) {
    const ModelParams p = section5();
    const Grid grid = Grid::uniform(32, 1.0);
    const auto got = discrete_spectrum(p, grid);
    const auto want = exact_grid_spectrum(p, grid);
    ASSERT_EQ(got.size(), want.size());
    for (const cplx w : want) {
        EXPECT_LT(std::abs(nearest(got, w) - w), 1e-8 * std::max(1.0, std::abs(w))) << w;
    }
    for (std::size_t i = 1; i < got.size(); ++i) EXPECT_GE(got[i - 1].real(), got[i].real());
}

TEST(DiscreteSpectrum, SecondOrderRefinement) {
    const ModelParams p = section5();
    for (int n = 1; n <= 4; ++n) {
        const cplx target = eigenvalues_no_delay(p, n).first;
        double prev = 0.0;
        for (const int N : {50, 100, 200}) {
            const auto spec = discrete_spectrum(p, Grid::uniform(N, 1.0));
            const double err = std::abs(nearest(spec, target) - target);
            if (prev > 0.0) {
                EXPECT_NEAR(std::log2(prev / err), 2.0, 0.2) << "n = " << n << ", N = " << N;
            }
            prev = err;
        }
    }
}

TEST(DiscreteSpectrum, CountTruncates) {
    const auto spec = discrete_spectrum(section5(), Grid::uniform(16, 1.0), 10);
    EXPECT_EQ(spec.size(), 10u);
    EXPECT_THROW(discrete_spectrum(section5(), Grid::single_point()), InvalidArgument);
}

TEST(NewtonRoot, ConvergesToDelayFreeRoot) {
    const ModelParams p = section5();
    const cplx want = eigenvalues_no_delay(p, 1).first;
    const auto z = newton_root(p, 1, 0.0, want + cplx(0.05, -0.05));
    ASSERT_TRUE(z);
    EXPECT_LT(std::abs(*z - want), 1e-10);
}

TEST(NewtonTrack, DerivativesMatchFiniteDifference) {
    const ModelParams p = section5();
    const cplx z(-0.1, 0.4);
    const double h = 1e-6;
    const auto d = char_det_derivatives(p, 2, z, 1.7);
    EXPECT_LT(std::abs((char_det(p, 2, z + h, 1.7) - char_det(p, 2, z - h, 1.7)) / (2 * h) - d.d_lambda), 1e-7);
    EXPECT_LT(std::abs((char_det(p, 2, z, 1.7 + h) - char_det(p, 2, z, 1.7 - h)) / (2 * h) - d.d_tau), 1e-7);
}

TEST(NewtonTrack, FindsCriticalDelay) {
    const ModelParams p = section5();
    const auto track = newton_track_root(p, 0, 0.0, 4.0, 400, eigenvalues_no_delay(p, 0).first);
    EXPECT_TRUE(track.all_converged());
    ASSERT_TRUE(track.crossing_tau.has_value());
    EXPECT_NEAR(*track.crossing_tau, tau_star(p).tau, 1e-6);
    EXPECT_NEAR(track.crossing_root->real(), 0.0, 1e-7);
    EXPECT_NEAR(track.crossing_root->imag(), tau_star(p).omega, 1e-6);
    EXPECT_GT(*track.crossing_slope, 0.0);
}

TEST(NewtonTrack, RejectsBadArguments) {
    const ModelParams p = section5();
    EXPECT_THROW(newton_track_root(p, 0, 0.0, 1.0, 0, cplx(0.0)), InvalidArgument);
    EXPECT_THROW(newton_track_root(p, 0, -1.0, 1.0, 10, cplx(0.0)), InvalidArgument);
}

TEST(GridClassify, TuringOnlyInsideTheTuringLabel) {
    const double d = 0.01, gamma = 1.0;
    const auto map = grid_classify(0.05, 0.95, 1.0, 2.0, d, gamma, 41);
    int turing = 0;
    for (std::size_t i = 0; i < map.alphas.size(); ++i) {
        for (std::size_t j = 0; j < map.rs.size(); ++j) {
            const Region reg = map.at(i, j);
            const std::size_t k = i * map.rs.size() + j;
            if (reg == Region::non_h1) continue;
            if (reg == Region::t_b) {
                ++turing;
                EXPECT_LT(map.min_dtilde[k], 0.0);
            } else if (reg != Region::hopf_unstable) {
                EXPECT_GE(map.min_dtilde[k], -1e-12) << map.alphas[i] << " " << map.rs[j];
            }
            // closed-form verdict agrees cell by cell
            const ModelParams p({.r = map.rs[j], .alpha = map.alphas[i], .gamma = gamma, .d = d});
            if (reg == Region::hopf_unstable) {
                EXPECT_LT(char_coeffs_no_delay(p, 0).t_tilde, 0.0);
                continue;
            }
            const auto rep = turing_analysis(p, 0);
            if (std::abs(map.min_dtilde[k]) > 1e-6) {
                EXPECT_EQ(rep.verdict == TuringVerdict::turing_unstable, reg == Region::t_b)
                    << map.alphas[i] << " " << map.rs[j];
            }
        }
    }
    EXPECT_GT(turing, 0);
}

TEST(GridClassify, HopfBoundaryWithinOneCell) {
    const double alpha_lo = 0.3, alpha_hi = 0.6, gamma = 8.0;
    const auto map = grid_classify(alpha_lo, alpha_hi, 1.0, 2.0, 1.0, gamma, 101);
    const double cell = map.rs[1] - map.rs[0];
    for (std::size_t i = 0; i < map.alphas.size(); i += 10) {
        const auto pts = hopf_points_in_r(map.alphas[i], gamma);
        for (const auto& h : pts) {
            if (h.r <= map.rs.front() || h.r >= map.rs.back()) continue;
            const auto j = static_cast<std::size_t>((h.r - map.rs.front()) / cell);
            const bool left = map.at(i, j) == Region::hopf_unstable;
            const bool right = map.at(i, j + 1) == Region::hopf_unstable;
            EXPECT_NE(left, right) << "alpha = " << map.alphas[i] << ", r_H = " << h.r;
        }
    }
}

TEST(GridClassify, RejectsBadRanges) {
    EXPECT_THROW(grid_classify(0.5, 0.4, 1.0, 2.0, 0.1, 1.0, 10), InvalidArgument);
    EXPECT_THROW(grid_classify(0.1, 0.4, 1.0, 2.0, 0.1, 1.0, 1), InvalidArgument);
    EXPECT_THROW(grid_classify(0.1, 0.4, 1.0, 2.0, 0.0, 1.0, 10), InvalidArgument);
}

TEST(OracleSuite, AllChecksPassAtReferencePoint) {
    const auto checks = run_oracle_suite(section5());
    ASSERT_GE(checks.size(), 10u);
    for (const auto& c : checks) {
        EXPECT_TRUE(c.passed) << c.name << ": error " << c.error << " > " << c.tolerance;
        EXPECT_FALSE(c.skipped) << c.name;
    }
}

TEST(OracleSuite, SkipsWithoutPositiveEquilibrium) {
    const auto checks = run_oracle_suite(ModelParams({.r = 0.5}));
    ASSERT_EQ(checks.size(), 1u);
    EXPECT_TRUE(checks[0].skipped);
}
