#pragma once

// Delay-induced Hopf analysis at E*: the transcendental characteristic equation
//   γλ² + T_n λ + (Bλ + M_n) e^{-λτ} + D_n = 0
// per Neumann mode, its imaginary-axis crossings and the smallest critical delay.

#include "mussel/linear_analysis.hpp"
#include "mussel/model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mussel {

struct SpectralCoeffsDelay {
    int n = 0;
    double t_n = 0.0;
    double m_n = 0.0;
    double d_n = 0.0;
    double b = 0.0;
    double script_t = 0.0; ///< T_n² - 2γD_n - B²
};

inline SpectralCoeffsDelay delay_char_coeffs(const ModelParams& p, int n) {
    const Equilibrium e = positive_equilibrium(p);
    const double k2 = p.wave_number_sq(n);
    const double r = p.r();
    const double g = p.gamma();
    SpectralCoeffsDelay c;
    c.n = n;
    c.t_n = p.alpha() + e.m + (1.0 + g * p.d()) * k2;
    c.m_n = r * e.a * e.m * (1.0 - p.alpha() * r - r * e.a * k2);
    c.d_n = p.d() * (p.alpha() + e.m + k2) * k2;
    c.b = -g * r * r * e.a * e.a * e.m;
    c.script_t = c.t_n * c.t_n - 2.0 * g * c.d_n - c.b * c.b;
    return c;
}

inline cplx char_residual(const ModelParams& p, int n, cplx lambda, double tau) {
    const auto c = delay_char_coeffs(p, n);
    return p.gamma() * lambda * lambda + c.t_n * lambda + (c.b * lambda + c.m_n) * std::exp(-lambda * tau) + c.d_n;
}

/// ∂/∂λ of the characteristic function.
inline cplx char_residual_dlambda(const ModelParams& p, int n, cplx lambda, double tau) {
    const auto c = delay_char_coeffs(p, n);
    const cplx ex = std::exp(-lambda * tau);
    return 2.0 * p.gamma() * lambda + c.t_n + (c.b - tau * (c.b * lambda + c.m_n)) * ex;
}

/// Velocity dλ/dτ of a simple characteristic root, by implicit differentiation.
inline cplx root_velocity(const ModelParams& p, int n, cplx lambda, double tau) {
    const auto c = delay_char_coeffs(p, n);
    const cplx ex = std::exp(-lambda * tau);
    const cplx dF_dtau = -lambda * (c.b * lambda + c.m_n) * ex;
    return -dF_dtau / char_residual_dlambda(p, n, lambda, tau);
}

/// ω_n = √z_n when D_n² - M_n² < 0, else empty (n ∉ S0).
inline std::optional<double> crossing_frequency(const ModelParams& p, int n) {
    const auto c = delay_char_coeffs(p, n);
    const double g = p.gamma();
    const double constant = c.d_n * c.d_n - c.m_n * c.m_n;
    if (!(constant < 0.0)) return std::nullopt;
    // larger root of γ²z² + 𝒯z + (D² - M²); the product of the roots is negative
    const double root = std::sqrt(c.script_t * c.script_t - 4.0 * g * g * constant);
    const double z = c.script_t > 0.0 ? -2.0 * constant / (c.script_t + root) : (root - c.script_t) / (2.0 * g * g);
    return std::sqrt(z);
}

struct HopfPoint {
    int n = 0;
    int j = 0;
    double omega = 0.0;
    double tau_crit = 0.0;
    double transversality = 0.0; ///< Re(dλ/dτ)^{-1} at the crossing
};

/// cos ωτ and sin ωτ solving the real/imaginary split at λ = iω.
struct CrossingPhase {
    double cos_wt = 0.0;
    double sin_wt = 0.0;
};

inline CrossingPhase crossing_phase(const SpectralCoeffsDelay& c, double gamma, double omega) {
    const double denom = c.m_n * c.m_n + omega * omega * c.b * c.b;
    if (!(denom > 0.0)) throw NumericalFailure("singular crossing normalisation M_n^2 + w^2 B^2 = 0");
    return {((gamma * c.m_n - c.b * c.t_n) * omega * omega - c.m_n * c.d_n) / denom,
            (c.m_n * c.t_n * omega + omega * c.b * (gamma * omega * omega - c.d_n)) / denom};
}

inline double transversality_at(const ModelParams& p, int n) {
    const auto omega = crossing_frequency(p, n);
    if (!omega) throw InvalidArgument("transversality_at: mode " + std::to_string(n) + " is not in S0");
    const auto c = delay_char_coeffs(p, n);
    const double g = p.gamma();
    const double radicand =
        c.script_t * c.script_t - 4.0 * g * g * (c.d_n * c.d_n - c.m_n * c.m_n);
    if (!(radicand > 0.0)) throw NumericalFailure("transversality radicand is not positive");
    return std::sqrt(radicand) / (c.b * c.b * *omega * *omega + c.m_n * c.m_n);
}

/// τ_{n,j} = (θ + 2jπ)/ω_n for j = 0..j_max, θ ∈ [0, 2π) the crossing phase.
inline std::vector<HopfPoint> critical_delays(const ModelParams& p, int n, int j_max) {
    const auto omega = crossing_frequency(p, n);
    if (!omega) throw InvalidArgument("critical_delays: mode " + std::to_string(n) + " is not in S0");
    const auto c = delay_char_coeffs(p, n);
    const auto phase = crossing_phase(c, p.gamma(), *omega);
    double angle = std::atan2(phase.sin_wt, phase.cos_wt);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    const double trans = transversality_at(p, n);
    std::vector<HopfPoint> out;
    out.reserve(static_cast<std::size_t>(j_max) + 1);
    for (int j = 0; j <= j_max; ++j) {
        out.push_back({n, j, *omega, (angle + 2.0 * std::numbers::pi * j) / *omega, trans});
    }
    return out;
}

/// Smallest N with D_n - M_n >= 0 and D_n + M_n > 0 for every n >= N.
/// Both are quadratics in k² with positive leading coefficient, so the tail is monotone
/// past the larger root.
inline int mode_escape_index(const ModelParams& p) {
    const Equilibrium e = positive_equilibrium(p);
    const double r = p.r();
    const double d = p.d();
    const double uptake = r * r * e.a * e.a * e.m;
    const double dtilde0 = p.alpha() * r * (r - 1.0) * e.a;
    // D - M = d s² + (dα/a* + uptake) s - D̃0,  D + M = d s² + (dα/a* - uptake) s + D̃0
    const auto largest_root = [&](double b, double c) {
        const double disc = b * b - 4.0 * d * c;
        if (disc < 0.0) return 0.0;
        return std::max(0.0, (-b + std::sqrt(disc)) / (2.0 * d));
    };
    const double s_minus = largest_root(d * p.alpha() / e.a + uptake, -dtilde0);
    const double s_plus = largest_root(d * p.alpha() / e.a - uptake, dtilde0);
    const double s = std::max(s_minus, s_plus);
    int n = static_cast<int>(std::floor(std::sqrt(s) * p.l()));
    const auto ok = [&](int m) {
        const auto c = delay_char_coeffs(p, m);
        return c.d_n - c.m_n >= 0.0 && c.d_n + c.m_n > 0.0;
    };
    while (n > 0 && ok(n - 1)) --n;
    while (!ok(n)) ++n;
    return n;
}

/// First n with D_n - M_n >= 0.
inline int first_nonnegative_d_minus_m(const ModelParams& p) {
    for (int n = 0;; ++n) {
        const auto c = delay_char_coeffs(p, n);
        if (c.d_n - c.m_n >= 0.0) return n;
    }
}

struct ModeScan {
    int n = 0;
    bool in_s0 = false;
    double d_minus_m = 0.0;
    double d_plus_m = 0.0;
    std::optional<double> omega;
    std::vector<HopfPoint> crossings;
};

struct TauStarReport {
    double tau = 0.0;
    int n0 = 0;
    double omega = 0.0;
    double transversality = 0.0;
    int n_max = 0;
    int n3 = 0; ///< first mode with D_n - M_n >= 0
    std::vector<ModeScan> modes;

    std::vector<int> s0() const {
        std::vector<int> out;
        for (const auto& m : modes) {
            if (m.in_s0) out.push_back(m.n);
        }
        return out;
    }
};

inline constexpr int kModeSafetyMargin = 5;

inline int default_n_max(const ModelParams& p) { return mode_escape_index(p) + kModeSafetyMargin; }

/// Exhaustive scan of n = 0..n_max (default: escape index + 5).
inline TauStarReport tau_star(const ModelParams& p, std::optional<int> n_max = std::nullopt, int j_max = 3) {
    require_h1(p);
    if (j_max < 0) throw InvalidArgument("j_max must be >= 0");
    TauStarReport rep;
    rep.n_max = n_max.value_or(default_n_max(p));
    if (rep.n_max < 0) throw InvalidArgument("n_max must be >= 0");
    rep.n3 = first_nonnegative_d_minus_m(p);
    bool found = false;
    for (int n = 0; n <= rep.n_max; ++n) {
        const auto c = delay_char_coeffs(p, n);
        ModeScan scan;
        scan.n = n;
        scan.d_minus_m = c.d_n - c.m_n;
        scan.d_plus_m = c.d_n + c.m_n;
        scan.omega = crossing_frequency(p, n);
        scan.in_s0 = scan.omega.has_value();
        if (scan.in_s0) {
            scan.crossings = critical_delays(p, n, j_max);
            const HopfPoint& first = scan.crossings.front();
            if (!found || first.tau_crit < rep.tau) {
                found = true;
                rep.tau = first.tau_crit;
                rep.n0 = n;
                rep.omega = first.omega;
                rep.transversality = first.transversality;
            }
        }
        rep.modes.push_back(std::move(scan));
    }
    if (!found) {
        throw EmptyCrossingSet("S0 is empty for n = 0.." + std::to_string(rep.n_max) +
                               ": no mode admits an imaginary-axis crossing, E* is stable for all tau");
    }
    return rep;
}

} // namespace mussel
