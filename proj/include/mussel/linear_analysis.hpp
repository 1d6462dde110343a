#pragma once

// Spectral analysis of the delay-free system at E*: per-mode quadratics,
// boundary-equilibrium stability, the Hopf curve in r and the Turing map.

#include "mussel/model.hpp"
#include "mussel/roots.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace mussel {

using cplx = std::complex<double>;

struct SpectralCoeffsNoDelay {
    int n = 0;
    double t_tilde = 0.0;
    double d_tilde = 0.0;
};

/// Coefficients of γλ² + T̃_n λ + D̃_n = 0.
inline SpectralCoeffsNoDelay char_coeffs_no_delay(const ModelParams& p, int n) {
    const Equilibrium e = positive_equilibrium(p);
    const double k2 = p.wave_number_sq(n);
    const double r = p.r();
    const double uptake = r * r * e.a * e.a * e.m;
    SpectralCoeffsNoDelay c;
    c.n = n;
    c.t_tilde = (1.0 + p.gamma() * p.d()) * k2 + p.alpha() / e.a - p.gamma() * uptake;
    c.d_tilde = p.d() * k2 * k2 + (p.d() * p.alpha() / e.a - uptake) * k2 + p.alpha() * r * (r - 1.0) * e.a;
    return c;
}

/// Both roots of a λ² + b λ + c = 0 (a != 0), ordered by descending real part.
/// Real roots use the cancellation-free form.
inline std::pair<cplx, cplx> quadratic_roots(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        const double re = -b / (2.0 * a);
        const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
        return {cplx(re, im), cplx(re, -im)};
    }
    const double s = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(s, b));
    double r1 = q / a;
    double r2 = (q != 0.0) ? c / q : -b / (2.0 * a);
    if (r2 > r1) std::swap(r1, r2);
    return {cplx(r1, 0.0), cplx(r2, 0.0)};
}

inline std::pair<cplx, cplx> eigenvalues_no_delay(const ModelParams& p, int n) {
    const auto c = char_coeffs_no_delay(p, n);
    return quadratic_roots(p.gamma(), c.t_tilde, c.d_tilde);
}

enum class Stability { stable, unstable, marginal };

inline const char* to_string(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
    }
    return "?";
}

struct BoundaryStability {
    Stability verdict = Stability::marginal;
    double max_real_part = 0.0;
    int deciding_mode = 0;
};

/// E0(0, 1): roots r - 1 - d n²/l² and -(α + n²/l²)/γ for n = 0..n_max.
inline BoundaryStability boundary_stability(const ModelParams& p, int n_max) {
    BoundaryStability out;
    out.max_real_part = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_max; ++n) {
        const double k2 = p.wave_number_sq(n);
        const double mussel_root = p.r() - 1.0 - p.d() * k2;
        const double algae_root = -(p.alpha() + k2) / p.gamma();
        const double top = std::max(mussel_root, algae_root);
        if (top > out.max_real_part) {
            out.max_real_part = top;
            out.deciding_mode = n;
        }
    }
    if (out.max_real_part < 0.0) {
        out.verdict = Stability::stable;
    } else if (out.max_real_part > 0.0) {
        out.verdict = Stability::unstable;
    } else {
        out.verdict = Stability::marginal;
    }
    return out;
}

/// Threshold separating the two transversality signs of the r-Hopf points.
inline double r_star(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("r_star requires 0 < alpha < 1");
    return (alpha + std::sqrt(alpha * alpha + 8.0 * alpha)) / (4.0 * alpha);
}

struct HopfInR {
    double r = 0.0;
    int transversality_sign = 0; ///< +1 below r*, -1 above
};

inline constexpr std::size_t kScanSubdivisions = 10000;

/// Roots of δ0²(r) - ρ0(r) in (1, 1/α); points coinciding with r* are dropped.
inline std::vector<HopfInR> hopf_points_in_r(double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw HypothesisViolation("hopf_points_in_r requires 0 < alpha < 1");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    const auto curve = [&](double r) {
        const double del = delta0(alpha, r);
        return del * del - rho0(alpha, gamma, r);
    };
    const double rs = r_star(alpha);
    std::vector<HopfInR> out;
    for (double r : roots::sign_scan(curve, 1.0, 1.0 / alpha, kScanSubdivisions, 1e-12)) {
        if (std::abs(r - rs) < 1e-10) continue;
        out.push_back({r, r < rs ? +1 : -1});
    }
    return out;
}

enum class TuringVerdict { stable, turing_unstable, hopf_unstable };

inline const char* to_string(TuringVerdict v) {
    switch (v) {
    case TuringVerdict::stable: return "stable";
    case TuringVerdict::turing_unstable: return "turing-unstable";
    case TuringVerdict::hopf_unstable: return "hopf-unstable";
    }
    return "?";
}

struct TuringReport {
    double g_r = 0.0;
    double lambda_disc = 0.0;
    std::optional<double> kc_squared;
    double min_mode_value = 0.0;  ///< min over continuous k² >= 0 of D̃(k²)
    double argmin_k_squared = 0.0;
    TuringVerdict verdict = TuringVerdict::stable;
    bool marginal = false;
    // discrete admissible modes k = n/l, n = 0..n_scan
    int discrete_min_mode = 0;
    double discrete_min_value = 0.0;
    std::vector<int> unstable_modes;
};

/// D̃ as a function of continuous k².
inline double dtilde_of_k2(const ModelParams& p, const Equilibrium& e, double k2) {
    const double r = p.r();
    return p.d() * k2 * k2 + (p.d() * p.alpha() / e.a - r * r * e.a * e.a * e.m) * k2 +
           p.alpha() * r * (r - 1.0) * e.a;
}

inline TuringReport turing_analysis(const ModelParams& p, int n_scan) {
    const auto hyp = check_hypotheses(p);
    if (!hyp.h1) throw HypothesisViolation("turing_analysis requires (H1)");
    if (!hyp.h2) throw HypothesisViolation("turing_analysis requires (H2): E* is already Hopf-unstable at n = 0");

    const Equilibrium e = positive_equilibrium(p);
    const double alpha = p.alpha();
    const double r = p.r();
    const double d = p.d();
    const double del = delta0(alpha, r);
    const double rho = rho0(alpha, p.gamma(), r);
    const double dtilde0 = alpha * r * (r - 1.0) * e.a;

    TuringReport rep;
    rep.g_r = e.m * (d * p.gamma() * rho - del * del);
    rep.lambda_disc = rep.g_r * rep.g_r - 4.0 * d * dtilde0;

    const double bracket = e.m / ((1.0 + e.m) * (1.0 + e.m)) - d * alpha / e.a;
    if (bracket > 0.0) rep.kc_squared = bracket / (2.0 * d);

    if (rep.kc_squared) {
        rep.argmin_k_squared = *rep.kc_squared;
        rep.min_mode_value = dtilde_of_k2(p, e, *rep.kc_squared);
    } else {
        rep.argmin_k_squared = 0.0;
        rep.min_mode_value = dtilde0;
    }

    if (rep.g_r >= 0.0) {
        rep.verdict = TuringVerdict::stable;
    } else if (rep.lambda_disc < 0.0) {
        rep.verdict = TuringVerdict::stable;
    } else if (rep.lambda_disc == 0.0) {
        rep.verdict = TuringVerdict::stable;
        rep.marginal = true;
    } else {
        rep.verdict = TuringVerdict::turing_unstable;
    }

    rep.discrete_min_value = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_scan; ++n) {
        const double v = dtilde_of_k2(p, e, p.wave_number_sq(n));
        if (v < rep.discrete_min_value) {
            rep.discrete_min_value = v;
            rep.discrete_min_mode = n;
        }
        if (v < 0.0) rep.unstable_modes.push_back(n);
    }
    return rep;
}

struct CurvePoint {
    double alpha = 0.0;
    double r = 0.0;
    int branch = 0;
};

/// Turing critical curve from D̃(k_c²) = 0 with k_c² > 0, i.e. Λ(r) = 0 with g(r) < 0.
/// Branch 0 is the lower r-root per α, branch 1 the upper.
inline std::vector<CurvePoint> turing_curve(double alpha_lo, double alpha_hi, double d, std::size_t resolution) {
    if (!(alpha_lo > 0.0 && alpha_hi < 1.0 && alpha_lo <= alpha_hi)) {
        throw InvalidArgument("turing_curve requires 0 < alpha_lo <= alpha_hi < 1");
    }
    if (!(d > 0.0)) throw InvalidArgument("d must be positive");
    if (resolution == 0) throw InvalidArgument("resolution must be positive");

    std::vector<CurvePoint> out;
    for (std::size_t i = 0; i < resolution; ++i) {
        const double alpha = resolution == 1
                                 ? alpha_lo
                                 : alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(i) /
                                                  static_cast<double>(resolution - 1);
        const auto g_of = [&](double r) {
            const Equilibrium e = positive_equilibrium_unchecked(alpha, r);
            return d * alpha / e.a - r * r * e.a * e.a * e.m;
        };
        const auto lambda_of = [&](double r) {
            const Equilibrium e = positive_equilibrium_unchecked(alpha, r);
            const double g = d * alpha / e.a - r * r * e.a * e.a * e.m;
            return g * g - 4.0 * d * alpha * r * (r - 1.0) * e.a;
        };
        int branch = 0;
        for (double r : roots::sign_scan(lambda_of, 1.0, 1.0 / alpha, kScanSubdivisions, 1e-13)) {
            if (g_of(r) < 0.0) out.push_back({alpha, r, branch++});
        }
    }
    return out;
}

} // namespace mussel
