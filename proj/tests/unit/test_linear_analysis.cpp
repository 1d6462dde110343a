#include "mussel/linear_analysis.hpp"
#include "mussel/verification.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mussel;

namespace {

ModelParams section5() { return ModelParams({.r = 2.0, .alpha = 0.1, .gamma = 0.5, .d = 1.0, .tau = 0.0, .l = 1.0}); }

// Hand-derived Jacobian entries of the delay-free kinetics (unscaled algae row).
struct RawJacobian {
    double mm, ma, am, aa;
};

RawJacobian raw_jacobian(double alpha, double r) {
    const double m = alpha * (r - 1.0) / (1.0 - alpha * r);
    const double a = alpha / (alpha + m);
    return {m / ((1.0 + m) * (1.0 + m)), r * m, -a, -alpha - m};
}

// γλ² + T λ + D from det(λΓ + k² diag(d,1) - J)
std::pair<double, double> quadratic_from_jacobian(double alpha, double r, double gamma, double d, double k2) {
    const RawJacobian j = raw_jacobian(alpha, r);
    const double t = gamma * (d * k2 - j.mm) + (k2 - j.aa);
    const double det = (d * k2 - j.mm) * (k2 - j.aa) - j.ma * j.am;
    return {t, det};
}

double brute_min_dtilde(double alpha, double r, double gamma, double d, double k2_max) {
    const auto f = [&](double k2) { return quadratic_from_jacobian(alpha, r, gamma, d, k2).second; };
    const int n = 200000;
    double best = f(0.0), arg = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double k2 = k2_max * i / n;
        if (const double v = f(k2); v < best) {
            best = v;
            arg = k2;
        }
    }
    double lo = std::max(0.0, arg - k2_max / n), hi = std::min(k2_max, arg + k2_max / n);
    for (int it = 0; it < 200; ++it) {
        const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
        (f(a) < f(b) ? hi : lo) = (f(a) < f(b) ? b : a);
    }
    return std::min(best, f(0.5 * (lo + hi)));
}

} // namespace

TEST(CharCoeffsNoDelay, ModeZeroDeterminant) {
    const ModelParams p = section5();
    const Equilibrium e = positive_equilibrium(p);
    EXPECT_NEAR(char_coeffs_no_delay(p, 0).d_tilde, p.alpha() * p.r() * (p.r() - 1.0) * e.a, 1e-15);
    EXPECT_GT(char_coeffs_no_delay(p, 0).d_tilde, 0.0);
}

TEST(CharCoeffsNoDelay, LimitCycleWindowHasNegativeTrace) {
    const ModelParams p({.r = 1.2, .alpha = 0.45, .gamma = 8.0, .d = 0.1});
    EXPECT_LT(char_coeffs_no_delay(p, 0).t_tilde, 0.0);
}

TEST(CharCoeffsNoDelay, MatchesJacobianAssembly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double alpha = 0.02 + 0.96 * u(rng);
        const double r = 1.0 + (1.0 / alpha - 1.0) * (0.01 + 0.98 * u(rng));
        const ModelParams p({.r = r, .alpha = alpha, .gamma = 0.1 + 9.9 * u(rng), .d = 0.001 + 2.0 * u(rng),
                             .l = 0.5 + 2.0 * u(rng)});
        for (int n = 0; n <= 6; ++n) {
            const auto c = char_coeffs_no_delay(p, n);
            const auto [t, det] = quadratic_from_jacobian(alpha, r, p.gamma(), p.d(), p.wave_number_sq(n));
            EXPECT_NEAR(c.t_tilde, t, 1e-10 * std::max(1.0, std::abs(t)));
            EXPECT_NEAR(c.d_tilde, det, 1e-10 * std::max(1.0, std::abs(det)));
        }
    }
}

TEST(CharCoeffsNoDelay, MonotoneInModeWhenCoefficientsPositive) {
    const ModelParams p = section5();
    const Equilibrium e = positive_equilibrium(p);
    ASSERT_GT(p.d() * p.alpha() / e.a - p.r() * p.r() * e.a * e.a * e.m, 0.0);
    for (int n = 0; n < 20; ++n) {
        EXPECT_LE(char_coeffs_no_delay(p, n).t_tilde, char_coeffs_no_delay(p, n + 1).t_tilde);
        EXPECT_LE(char_coeffs_no_delay(p, n).d_tilde, char_coeffs_no_delay(p, n + 1).d_tilde);
    }
}

TEST(QuadraticRoots, PureImaginaryCase) {
    const auto [a, b] = quadratic_roots(2.0, 0.0, 8.0);
    EXPECT_NEAR(a.real(), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a.imag()), 2.0, 1e-15);
    EXPECT_NEAR(b.imag(), -a.imag(), 1e-15);
}

TEST(QuadraticRoots, NoCancellationForSmallRoot) {
    // roots 1e8 and 1e-8
    const auto [big, small] = quadratic_roots(1.0, -(1e8 + 1e-8), 1.0);
    EXPECT_NEAR(big.real(), 1e8, 1e-6);
    EXPECT_NEAR(small.real(), 1e-8, 1e-22);
}

TEST(EigenvaluesNoDelay, ResidualOnRandomDraws) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double alpha = 0.02 + 0.96 * u(rng);
        const double r = 1.0 + (1.0 / alpha - 1.0) * (0.01 + 0.98 * u(rng));
        const ModelParams p({.r = r, .alpha = alpha, .gamma = 0.1 + 9.9 * u(rng), .d = 0.001 + 2.0 * u(rng)});
        for (int n = 0; n <= 8; ++n) {
            const auto c = char_coeffs_no_delay(p, n);
            const auto [l1, l2] = eigenvalues_no_delay(p, n);
            for (const cplx lam : {l1, l2}) {
                const cplx res = p.gamma() * lam * lam + c.t_tilde * lam + c.d_tilde;
                const double scale = std::max({1.0, p.gamma() * std::norm(lam), std::abs(c.t_tilde * lam), std::abs(c.d_tilde)});
                EXPECT_LT(std::abs(res) / scale, 1e-12);
            }
            EXPECT_GE(l1.real(), l2.real());
        }
    }
}

TEST(BoundaryStability, VerdictFollowsR) {
    EXPECT_EQ(boundary_stability(ModelParams({.r = 0.5}), 20).verdict, Stability::stable);
    const auto unstable = boundary_stability(ModelParams({.r = 2.0}), 20);
    EXPECT_EQ(unstable.verdict, Stability::unstable);
    EXPECT_EQ(unstable.deciding_mode, 0);
    EXPECT_EQ(boundary_stability(ModelParams({.r = 1.0}), 20).verdict, Stability::marginal);
}

TEST(RStar, ClosedFormValues) {
    EXPECT_NEAR(r_star(0.1), 2.5, 1e-15);
    EXPECT_NEAR(r_star(1.0 - 1e-12), 1.0, 1e-9);
    const double rs = r_star(0.45);
    EXPECT_GT(rs, 1.0);
    EXPECT_LT(rs, 1.0 / 0.45);
}

TEST(HopfPointsInR, OdeWindowEndpoints) {
    const auto pts = hopf_points_in_r(0.45, 8.0);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_NEAR(pts[0].r, 1.0865, 1e-3);
    EXPECT_NEAR(pts[1].r, 1.7286, 1e-3);
    for (const auto& h : pts) {
        const ModelParams p({.r = h.r, .alpha = 0.45, .gamma = 8.0});
        EXPECT_LT(std::abs(char_coeffs_no_delay(p, 0).t_tilde), 1e-9);
        EXPECT_LT(std::abs(eigenvalues_no_delay(p, 0).first.real()), 1e-10);
    }
}

TEST(HopfPointsInR, TransversalitySignMatchesFiniteDifference) {
    const double alpha = 0.45, gamma = 8.0;
    const auto trace = [&](double r) { return quadratic_from_jacobian(alpha, r, gamma, 1.0, 0.0).first; };
    for (const auto& h : hopf_points_in_r(alpha, gamma)) {
        // Re λ = -T/(2γ) on the complex branch, so its slope has the sign of -dT/dr
        const double slope = -(trace(h.r + 1e-6) - trace(h.r - 1e-6));
        EXPECT_EQ(slope > 0 ? 1 : -1, h.transversality_sign) << "r = " << h.r;
    }
}

TEST(HopfPointsInR, DenseGridOracle) {
    const double alpha = 0.9, gamma = 0.1;
    const auto pts = hopf_points_in_r(alpha, gamma);
    const auto trace = [&](double r) { return quadratic_from_jacobian(alpha, r, gamma, 1.0, 0.0).first; };
    std::vector<double> brute;
    const int n = 1000000;
    const double lo = 1.0, hi = 1.0 / alpha, step = (hi - lo) / n;
    double prev = trace(lo + step);
    for (int i = 2; i < n; ++i) {
        const double r = lo + step * i;
        const double v = trace(r);
        if ((v < 0) != (prev < 0)) brute.push_back(r - 0.5 * step);
        prev = v;
    }
    ASSERT_EQ(pts.size(), brute.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(pts[i].r, brute[i], step);
}

TEST(TuringAnalysis, RequiresH2) {
    EXPECT_THROW(turing_analysis(ModelParams({.r = 1.2, .alpha = 0.45, .gamma = 8.0, .d = 0.1}), 10),
                 HypothesisViolation);
    EXPECT_THROW(turing_analysis(ModelParams({.r = 0.5}), 10), HypothesisViolation);
}

TEST(TuringAnalysis, PositiveGIsStable) {
    const auto rep = turing_analysis(section5(), 30);
    EXPECT_GE(rep.g_r, 0.0);
    EXPECT_EQ(rep.verdict, TuringVerdict::stable);
    EXPECT_TRUE(rep.unstable_modes.empty());
}

TEST(TuringAnalysis, TuringSampleInsideWindow) {
    const ModelParams p({.r = 1.3, .alpha = 0.5, .gamma = 1.0, .d = 0.01});
    const auto rep = turing_analysis(p, 50);
    EXPECT_EQ(rep.verdict, TuringVerdict::turing_unstable);
    ASSERT_TRUE(rep.kc_squared.has_value());
    EXPECT_LT(rep.min_mode_value, 0.0);
    EXPECT_GT(char_coeffs_no_delay(p, 0).t_tilde, 0.0);
    EXPECT_FALSE(rep.unstable_modes.empty());
    EXPECT_NEAR(*rep.kc_squared, -rep.g_r / (2.0 * p.d()), 1e-12);
}

TEST(TuringAnalysis, MinimumMatchesDenseScan) {
    for (const double r : {1.05, 1.3, 1.6, 1.88, 1.95}) {
        const ModelParams p({.r = r, .alpha = 0.5, .gamma = 1.0, .d = 0.01});
        const auto rep = turing_analysis(p, 10);
        EXPECT_NEAR(rep.min_mode_value, brute_min_dtilde(0.5, r, 1.0, 0.01, 1e3), 1e-8) << "r = " << r;
        EXPECT_EQ(rep.kc_squared.has_value(), rep.g_r < 0.0);
    }
}

TEST(TuringAnalysis, VerdictMatchesBruteForceOnRandomDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0, unstable = 0;
    while (tested < 100) {
        const double alpha = 0.02 + 0.96 * u(rng);
        const double r = 1.0 + (1.0 / alpha - 1.0) * (0.01 + 0.98 * u(rng));
        const double d = std::pow(10.0, -3.0 + 3.0 * u(rng));
        const ModelParams p({.r = r, .alpha = alpha, .gamma = 0.1 + 4.9 * u(rng), .d = d});
        if (!check_hypotheses(p).h2) continue;
        ++tested;
        const auto rep = turing_analysis(p, 10);
        const double brute = brute_min_dtilde(alpha, r, p.gamma(), d, 1e3);
        const bool brute_unstable = brute < -1e-12;
        if (std::abs(brute) > 1e-10) {
            EXPECT_EQ(rep.verdict == TuringVerdict::turing_unstable, brute_unstable);
        }
        if (rep.verdict == TuringVerdict::turing_unstable) {
            ++unstable;
            EXPECT_LT(rep.min_mode_value, 0.0);
            EXPECT_GT(char_coeffs_no_delay(p, 0).t_tilde, 0.0);
        }
    }
    EXPECT_GT(unstable, 0);
}

TEST(TuringCurve, PointsAreMarginal) {
    const double d = 0.01;
    const auto pts = turing_curve(0.2, 0.8, d, 13);
    ASSERT_FALSE(pts.empty());
    for (const auto& c : pts) {
        EXPECT_NEAR(brute_min_dtilde(c.alpha, c.r, 1.0, d, 1e3), 0.0, 1e-8) << c.alpha << " " << c.r;
        const RawJacobian j = raw_jacobian(c.alpha, c.r);
        EXPECT_GT(j.mm - d * (-j.aa), 0.0); // k_c² > 0
    }
}

TEST(TuringCurve, SeparatesFourRegionsAtAlphaHalf) {
    const double d = 0.01;
    const auto pts = turing_curve(0.5, 0.5, d, 1);
    ASSERT_EQ(pts.size(), 2u);
    const double l1 = pts[0].r, l2 = pts[1].r;
    EXPECT_EQ(pts[0].branch, 0);
    EXPECT_EQ(pts[1].branch, 1);
    // one sample per region, each classified by turing_analysis
    const auto verdict = [&](double r) {
        return turing_analysis(ModelParams({.r = r, .alpha = 0.5, .gamma = 1.0, .d = d}), 10);
    };
    const auto below = verdict(0.5 * (1.0 + l1));
    const auto inside = verdict(0.5 * (l1 + l2));
    const auto above = verdict(l2 + 0.01);
    const auto far = verdict(1.97);
    EXPECT_EQ(below.verdict, TuringVerdict::stable);
    EXPECT_LT(below.lambda_disc, 0.0);
    EXPECT_EQ(inside.verdict, TuringVerdict::turing_unstable);
    EXPECT_EQ(above.verdict, TuringVerdict::stable);
    EXPECT_LT(above.g_r, 0.0);
    EXPECT_EQ(far.verdict, TuringVerdict::stable);
    EXPECT_GE(far.g_r, 0.0);
}

TEST(TuringCurve, CrossCheckedByCellClassification) {
    const double d = 0.01, alpha = 0.5;
    const auto pts = turing_curve(alpha, alpha, d, 1);
    ASSERT_EQ(pts.size(), 2u);
    const auto rs = verification::linspace(1.001, 1.999, 2001);
    std::vector<double> edges;
    for (std::size_t j = 1; j < rs.size(); ++j) {
        const bool a = verification::classify_cell(alpha, rs[j - 1], d, 1.0) == verification::Region::t_b;
        const bool b = verification::classify_cell(alpha, rs[j], d, 1.0) == verification::Region::t_b;
        if (a != b) edges.push_back(0.5 * (rs[j - 1] + rs[j]));
    }
    ASSERT_EQ(edges.size(), 2u);
    const double cell = rs[1] - rs[0];
    EXPECT_NEAR(edges[0], pts[0].r, cell);
    EXPECT_NEAR(edges[1], pts[1].r, cell);
}
