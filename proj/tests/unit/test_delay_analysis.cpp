#include "mussel/delay_analysis.hpp"
#include "mussel/linear_analysis.hpp"
#include "mussel/verification.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mussel;

namespace {

ModelParams section5(double tau = 0.0) {
    return ModelParams({.r = 2.0, .alpha = 0.1, .gamma = 0.5, .d = 1.0, .tau = tau, .l = 1.0});
}

ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = 0.02 + 0.96 * u(rng);
    const double r = 1.0 + (1.0 / alpha - 1.0) * (0.01 + 0.98 * u(rng));
    return ModelParams({.r = r, .alpha = alpha, .gamma = 0.1 + 4.9 * u(rng), .d = 0.01 + 2.0 * u(rng),
                        .l = 0.5 + 2.0 * u(rng)});
}

// Positive root of |γ(iω)² + T iω + D|² = |B iω + M|², found by bisection on ω.
std::optional<double> modulus_root(const SpectralCoeffsDelay& c, double gamma) {
    const auto f = [&](double w) {
        const std::complex<double> lhs(c.d_n - gamma * w * w, c.t_n * w);
        const std::complex<double> rhs(c.m_n, c.b * w);
        return std::norm(lhs) - std::norm(rhs);
    };
    if (!(f(0.0) < 0.0)) return std::nullopt;
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(DelayCoeffs, ReduceToDelayFreeCoefficients) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_params(rng);
        for (int n = 0; n <= 10; ++n) {
            const auto dl = delay_char_coeffs(p, n);
            const auto nd = char_coeffs_no_delay(p, n);
            EXPECT_NEAR(dl.t_n + dl.b, nd.t_tilde, 1e-12 * std::max(1.0, std::abs(nd.t_tilde)));
            EXPECT_NEAR(dl.d_n + dl.m_n, nd.d_tilde, 1e-12 * std::max(1.0, std::abs(nd.d_tilde)));
        }
    }
}

TEST(DelayCoeffs, ResidualAtZeroDelayIsTheQuadratic) {
    const ModelParams p = section5();
    for (int n = 0; n <= 4; ++n) {
        const auto [l1, l2] = eigenvalues_no_delay(p, n);
        EXPECT_LT(std::abs(char_residual(p, n, l1, 0.0)), 1e-12);
        EXPECT_LT(std::abs(char_residual(p, n, l2, 0.0)), 1e-12);
    }
}

TEST(DelayCoeffs, DerivativeMatchesFiniteDifference) {
    const ModelParams p = section5();
    const cplx z(-0.3, 0.7);
    const double h = 1e-6;
    for (int n = 0; n <= 3; ++n) {
        const cplx fd = (char_residual(p, n, z + h, 2.0) - char_residual(p, n, z - h, 2.0)) / (2.0 * h);
        EXPECT_LT(std::abs(fd - char_residual_dlambda(p, n, z, 2.0)), 1e-7);
    }
}

TEST(CrossingFrequency, ModeZeroAlwaysAdmitsCrossing) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const ModelParams p = random_params(rng);
        EXPECT_TRUE(crossing_frequency(p, 0).has_value());
    }
}

TEST(CrossingFrequency, MatchesModulusBisection) {
    std::mt19937_64 rng(13);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_params(rng);
        for (int n = 0; n <= 6; ++n) {
            const auto c = delay_char_coeffs(p, n);
            const auto w = crossing_frequency(p, n);
            const auto oracle = modulus_root(c, p.gamma());
            ASSERT_EQ(w.has_value(), oracle.has_value()) << "n = " << n;
            if (w) {
                EXPECT_NEAR(*w, *oracle, 1e-9 * std::max(1.0, *oracle));
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 100);
}

TEST(CrossingPhase, LiesOnTheUnitCircle) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_params(rng);
        for (int n = 0; n <= 4; ++n) {
            const auto w = crossing_frequency(p, n);
            if (!w) continue;
            const auto ph = crossing_phase(delay_char_coeffs(p, n), p.gamma(), *w);
            EXPECT_NEAR(ph.cos_wt * ph.cos_wt + ph.sin_wt * ph.sin_wt, 1.0, 1e-9);
        }
    }
}

TEST(CriticalDelays, BranchesAreRootsAndEquallySpaced) {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 50; ++i) {
        const ModelParams p = random_params(rng);
        for (int n = 0; n <= 3; ++n) {
            if (!crossing_frequency(p, n)) continue;
            const auto pts = critical_delays(p, n, 3);
            ASSERT_EQ(pts.size(), 4u);
            for (std::size_t j = 0; j < pts.size(); ++j) {
                EXPECT_GE(pts[j].tau_crit, 0.0);
                const cplx lam(0.0, pts[j].omega);
                const double scale = std::max(1.0, p.gamma() * pts[j].omega * pts[j].omega);
                EXPECT_LT(std::abs(char_residual(p, n, lam, pts[j].tau_crit)) / scale, 1e-10);
                if (j > 0) {
                    EXPECT_NEAR(pts[j].tau_crit - pts[j - 1].tau_crit, 2.0 * std::numbers::pi / pts[j].omega, 1e-9);
                }
            }
        }
    }
}

TEST(CriticalDelays, RejectsModeOutsideS0) {
    const ModelParams p = section5();
    const auto rep = tau_star(p);
    const int outside = rep.n_max;
    ASSERT_FALSE(crossing_frequency(p, outside).has_value());
    EXPECT_THROW(critical_delays(p, outside, 2), InvalidArgument);
    EXPECT_THROW(transversality_at(p, outside), InvalidArgument);
}

TEST(TauStar, ReferenceParameterSet) {
    const auto rep = tau_star(section5());
    EXPECT_NEAR(rep.omega, 0.3253, 1e-3);
    EXPECT_NEAR(rep.tau, 2.3545, 1e-3);
    EXPECT_EQ(rep.n0, 0);
    EXPECT_EQ(rep.s0(), std::vector<int>{0});
    EXPECT_GT(rep.transversality, 0.0);
}

TEST(TauStar, TransversalityAgreesWithRootVelocity) {
    const ModelParams p = section5();
    const auto rep = tau_star(p);
    const cplx v = root_velocity(p, rep.n0, cplx(0.0, rep.omega), rep.tau);
    EXPECT_GT(v.real(), 0.0);
    // sign(Re dλ/dτ) = sign(Re (dλ/dτ)^{-1})
    EXPECT_GT((1.0 / v).real() * rep.transversality, 0.0);
}

TEST(TauStar, CrossingSlopeMatchesNewtonTrack) {
    const ModelParams p = section5();
    const auto rep = tau_star(p);
    const auto track =
        verification::newton_track_root(p, 0, 0.0, 1.5 * rep.tau, 600, eigenvalues_no_delay(p, 0).first);
    ASSERT_TRUE(track.crossing_tau.has_value());
    EXPECT_NEAR(*track.crossing_tau, rep.tau, 1e-6);
    const double velocity = root_velocity(p, 0, cplx(0.0, rep.omega), rep.tau).real();
    EXPECT_NEAR(*track.crossing_slope, velocity, 0.05 * std::abs(velocity));
}

TEST(TauStar, ScanCoversEscapeIndex) {
    const ModelParams p = section5();
    const auto rep = tau_star(p);
    EXPECT_EQ(rep.n_max, mode_escape_index(p) + kModeSafetyMargin);
    EXPECT_EQ(rep.modes.size(), static_cast<std::size_t>(rep.n_max) + 1);
    for (int n = mode_escape_index(p); n <= rep.n_max + 50; ++n) {
        const auto c = delay_char_coeffs(p, n);
        EXPECT_GE(c.d_n - c.m_n, 0.0) << n;
        EXPECT_GT(c.d_n + c.m_n, 0.0) << n;
    }
    EXPECT_THROW(tau_star(p, std::nullopt, -1), InvalidArgument);
    EXPECT_THROW(tau_star(ModelParams({.r = 0.5})), HypothesisViolation);
}

TEST(TauStar, EscapeIndexOnRandomDraws) {
    std::mt19937_64 rng(16);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_params(rng);
        const int n = mode_escape_index(p);
        for (int m = n; m < n + 100; ++m) {
            const auto c = delay_char_coeffs(p, m);
            ASSERT_GE(c.d_n - c.m_n, 0.0);
            ASSERT_GT(c.d_n + c.m_n, 0.0);
        }
        if (n > 0) {
            const auto c = delay_char_coeffs(p, n - 1);
            EXPECT_FALSE(c.d_n - c.m_n >= 0.0 && c.d_n + c.m_n > 0.0);
        }
    }
}

// Number of characteristic roots of mode n in the right half-plane, by the argument
// principle on the rectangle [0, R] x [-R, R].
int unstable_root_count(const ModelParams& p, int n, double tau, double R = 10.0) {
    const auto f = [&](cplx z) { return verification::char_det(p, n, z, tau); };
    const std::vector<std::pair<cplx, cplx>> sides{
        {cplx(0.0, -R), cplx(R, -R)}, {cplx(R, -R), cplx(R, R)}, {cplx(R, R), cplx(0.0, R)}, {cplx(0.0, R), cplx(0.0, -R)}};
    double winding = 0.0;
    const int steps = 20000;
    for (const auto& [a, b] : sides) {
        cplx prev = f(a);
        for (int k = 1; k <= steps; ++k) {
            const cplx cur = f(a + (b - a) * (static_cast<double>(k) / steps));
            winding += std::arg(cur / prev);
            prev = cur;
        }
    }
    return static_cast<int>(std::lround(winding / (2.0 * std::numbers::pi)));
}

// Below τ* no mode has a root in the right half-plane; just above τ* exactly the
// conjugate pair of mode n0 has crossed.
TEST(TauStar, StabilitySwitchesOnlyAtCriticalMode) {
    const ModelParams p = section5();
    const auto rep = tau_star(p);
    for (int n = 0; n <= 6; ++n) {
        EXPECT_EQ(unstable_root_count(p, n, 0.0), 0) << "n = " << n;
        EXPECT_EQ(unstable_root_count(p, n, rep.tau - 0.05), 0) << "n = " << n;
        EXPECT_EQ(unstable_root_count(p, n, rep.tau + 0.05), n == rep.n0 ? 2 : 0) << "n = " << n;
    }
}
