#pragma once

/// Center-manifold reduction at the first delay-induced Hopf point.
///
/// Time is rescaled by τ* so the delay is 1, and deviations from E* are
/// written in the Fourier basis b_n = cos(nx/l)/||cos(nx/l)|| on (0, lπ).
/// All second-component terms carry the 1/γ factor of Γ^{-1} = diag(1, 1/γ),
/// including the adjoint eigenvector q*(0) = M(q2, 1), which is the left
/// null vector of the Γ^{-1}-scaled mode matrix.
///
/// The pipeline is: tau_star -> eigenpair -> g_coefficients ->
/// center_manifold_terms -> g21 -> c1(0), μ2, β2, T2.

#include "mussel/delay_analysis.hpp"
#include "mussel/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

namespace mussel {

using Vec2c = std::array<cplx, 2>;
using Mat2c = std::array<std::array<cplx, 2>, 2>;

inline Vec2c operator+(const Vec2c& a, const Vec2c& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2c operator-(const Vec2c& a, const Vec2c& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2c operator*(cplx s, const Vec2c& v) { return {s * v[0], s * v[1]}; }
inline Vec2c conj(const Vec2c& v) { return {std::conj(v[0]), std::conj(v[1])}; }
inline double norm_inf(const Vec2c& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }
inline cplx dot(const Vec2c& row, const Vec2c& col) { return row[0] * col[0] + row[1] * col[1]; }

inline Vec2c operator*(const Mat2c& m, const Vec2c& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}
inline Mat2c operator+(const Mat2c& a, const Mat2c& b) {
    return {{{a[0][0] + b[0][0], a[0][1] + b[0][1]}, {a[1][0] + b[1][0], a[1][1] + b[1][1]}}};
}
inline Mat2c operator*(cplx s, const Mat2c& m) {
    return {{{s * m[0][0], s * m[0][1]}, {s * m[1][0], s * m[1][1]}}};
}
inline Mat2c identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

inline constexpr double kDeterminantGuard = 1e-14;

struct LinearSolve {
    Vec2c x{};
    double residual = 0.0; ///< ||A x - b||_inf
    double determinant_abs = 0.0;
};

/// Direct 2x2 solve. A determinant below the guard is reported as a resonance.
inline LinearSolve solve2(const Mat2c& a, const Vec2c& b, const char* what) {
    const cplx det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (std::abs(det) < kDeterminantGuard) {
        throw Resonance(std::string("singular center-manifold system (") + what +
                        "): |det| = " + std::to_string(std::abs(det)));
    }
    LinearSolve out;
    out.x = {(a[1][1] * b[0] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det};
    out.residual = norm_inf(a * out.x - b);
    out.determinant_abs = std::abs(det);
    return out;
}

/// Linearisation blocks at E*: L1 acts on the current state, L2 on the delayed one.
struct LinearBlocks {
    Mat2c l1{};
    Mat2c l2{};
    double gamma = 1.0;
    double d = 1.0;
};

inline LinearBlocks linear_blocks(const ModelParams& p) {
    const Equilibrium e = positive_equilibrium(p);
    LinearBlocks b;
    b.l1 = {{{0.0, 0.0}, {-e.a, -(p.alpha() + e.m)}}};
    b.l2 = {{{e.m / ((1.0 + e.m) * (1.0 + e.m)), p.r() * e.m}, {0.0, 0.0}}};
    b.gamma = p.gamma();
    b.d = p.d();
    return b;
}

inline Mat2c gamma_inv(const Mat2c& m, double gamma) {
    return {{{m[0][0], m[0][1]}, {m[1][0] / gamma, m[1][1] / gamma}}};
}

/// ∫_{-1}^{0} e^{μθ} dη_n(θ) = τΓ^{-1}(L1 + L2 e^{-μ}) - (n²/l²) τ Γ^{-1} D.
inline Mat2c eta_integral(const ModelParams& p, double tau, int n, cplx mu) {
    const LinearBlocks b = linear_blocks(p);
    const double k2 = p.wave_number_sq(n);
    Mat2c m = gamma_inv(b.l1 + std::exp(-mu) * b.l2, b.gamma);
    m[0][0] -= k2 * p.d();
    m[1][1] -= k2 / p.gamma();
    return cplx(tau) * m;
}

/// Fourier-basis integrals ∫ b_{n0}^k dx over (0, lπ) for k = 2, 3, 4.
struct ModeIntegrals {
    double b2 = 1.0;
    double b3 = 0.0;
    double b4 = 0.0;
};

inline ModeIntegrals mode_integrals(int n0, double l) {
    const double len = l * std::numbers::pi;
    if (n0 == 0) return {1.0, 1.0 / std::sqrt(len), 1.0 / len};
    return {1.0, 0.0, 3.0 / (2.0 * len)};
}

struct Eigenpair {
    cplx q1;
    cplx q2;
    cplx m_norm;
    double omega = 0.0;
    double tau_star = 0.0;
    int n0 = 0;

    Vec2c q0() const { return {1.0, q1}; }
    Vec2c qstar0() const { return {m_norm * q2, m_norm}; }
};

inline constexpr double kCrossingTolerance = 1e-8;

/// q(θ) = (1, q1) e^{iωτ*θ},  q*(s) = M (q2, 1) e^{-iωτ* s}.
inline Eigenpair eigenpair(const ModelParams& p, int n0, double omega, double tau_star) {
    const cplx lam(0.0, omega);
    const cplx res = char_residual(p, n0, lam, tau_star);
    if (!(std::abs(res) <= kCrossingTolerance)) {
        throw InvalidArgument("eigenpair: (i*omega, tau) is not a crossing of mode " + std::to_string(n0) +
                              ", residual " + std::to_string(std::abs(res)));
    }
    const Equilibrium e = positive_equilibrium(p);
    const double r = p.r();
    const double g = p.gamma();
    const cplx diag = cplx(p.alpha() + e.m + p.wave_number_sq(n0), g * omega);
    const cplx ex = std::exp(cplx(0.0, -omega * tau_star));

    Eigenpair ep;
    ep.n0 = n0;
    ep.omega = omega;
    ep.tau_star = tau_star;
    ep.q1 = -e.a / diag;
    ep.q2 = diag / (g * r * e.m * ex);
    ep.m_norm = std::exp(cplx(0.0, omega * tau_star)) /
                ((ep.q1 + ep.q2) * std::exp(cplx(0.0, omega * tau_star)) +
                 tau_star * ep.q2 * (r * r * e.a * e.a * e.m + ep.q1 * r * e.m));
    return ep;
}

/// (ψ, φ)_c for ψ(s) = ψ0 e^{a s} on [0, 1] and φ(θ) = φ0 e^{bθ} on [-1, 0].
/// Only the delayed block contributes to the double integral.
inline cplx bilinear_form(const ModelParams& p, double tau, const Vec2c& psi0, cplx a, const Vec2c& phi0, cplx b) {
    const LinearBlocks lb = linear_blocks(p);
    const Mat2c delayed = cplx(tau) * gamma_inv(lb.l2, lb.gamma);
    const cplx c = a + b;
    // ∫_0^{-1} e^{cξ} dξ
    const cplx inner = std::abs(c) < 1e-300 ? cplx(-1.0) : (std::exp(-c) - 1.0) / c;
    return dot(psi0, phi0) - std::exp(a) * inner * dot(psi0, delayed * phi0);
}

struct Normalisation {
    cplx pairing;           ///< (q*, q)_c
    cplx conjugate_pairing; ///< (q*, q̄)_c
};

inline Normalisation check_normalisation(const ModelParams& p, const Eigenpair& ep) {
    const cplx iwt(0.0, ep.omega * ep.tau_star);
    return {bilinear_form(p, ep.tau_star, ep.qstar0(), -iwt, ep.q0(), iwt),
            bilinear_form(p, ep.tau_star, ep.qstar0(), -iwt, conj(ep.q0()), -iwt)};
}

/// Taylor coefficients of the shifted kinetics at E* (m0, a0 current; m1, a1 delayed).
///   f1 = r m0 a1 + c_m1m1 m1² + c_m0m1 m0 m1 + c_m1m1m1 m1³ + c_m0m1m1 m0 m1² + O(4)
///   f2 = -m0 a0
struct NonlinearCoeffs {
    double r_m0_a1 = 0.0;
    double m1_m1 = 0.0;
    double m0_m1 = 0.0;
    double m1_m1_m1 = 0.0;
    double m0_m1_m1 = 0.0;
    double f2_m0_a0 = -1.0;

    template <class T>
    T f1(T m0, T /*a0*/, T m1, T a1) const {
        return r_m0_a1 * m0 * a1 + m1_m1 * m1 * m1 + m0_m1 * m0 * m1 + m1_m1_m1 * m1 * m1 * m1 +
               m0_m1_m1 * m0 * m1 * m1;
    }
    template <class T>
    T f2(T m0, T a0, T /*m1*/, T /*a1*/) const {
        return f2_m0_a0 * m0 * a0;
    }
};

inline NonlinearCoeffs nonlinear_expansion(const ModelParams& p) {
    const Equilibrium e = positive_equilibrium(p);
    const double s = 1.0 + e.m;
    NonlinearCoeffs c;
    c.r_m0_a1 = p.r();
    c.m1_m1 = -e.m / (s * s * s);
    c.m0_m1 = 1.0 / (s * s);
    c.m1_m1_m1 = e.m / (s * s * s * s);
    c.m0_m1_m1 = -1.0 / (s * s * s);
    c.f2_m0_a0 = -1.0;
    return c;
}

struct QuadraticCoefficients {
    cplx g20;
    cplx g11;
    cplx g02;
    Vec2c f20_hat{}; ///< coefficient of z²/2, second component scaled by 1/γ
    Vec2c f11_hat{}; ///< coefficient of z z̄
    Vec2c f02_hat{};
};

inline QuadraticCoefficients g_coefficients(const ModelParams& p, const Eigenpair& ep) {
    const Equilibrium e = positive_equilibrium(p);
    const double r = p.r();
    const double g = p.gamma();
    const double s = 1.0 + e.m;
    const cplx q1 = ep.q1;
    const cplx q1b = std::conj(q1);
    const cplx ex = std::exp(cplx(0.0, -ep.omega * ep.tau_star));
    const cplx exb = std::conj(ex);

    QuadraticCoefficients out;
    out.f20_hat = {2.0 * r * q1 * ex + 2.0 / (s * s) * ex - 2.0 * e.m / (s * s * s) * ex * ex, -2.0 / g * q1};
    out.f11_hat = {r * (q1 * ex + q1b * exb) + 2.0 * ex.real() / (s * s) - 2.0 * e.m / (s * s * s),
                   -1.0 / g * (q1 + q1b)};
    out.f02_hat = {2.0 * r * q1b * exb + 2.0 / (s * s) * exb - 2.0 * e.m / (s * s * s) * exb * exb,
                   -2.0 / g * q1b};

    const ModeIntegrals mi = mode_integrals(ep.n0, p.l());
    const cplx scale = ep.tau_star * ep.m_norm * mi.b3;
    out.g20 = scale * (ep.q2 * out.f20_hat[0] + out.f20_hat[1]);
    out.g11 = scale * (ep.q2 * out.f11_hat[0] + out.f11_hat[1]);
    out.g02 = scale * (ep.q2 * out.f02_hat[0] + out.f02_hat[1]);
    return out;
}

/// Sum of exponentials Σ coef_k e^{rate_k θ}, θ ∈ [-1, 0].
struct ExpSeries {
    struct Term {
        Vec2c coef{};
        cplx rate;
    };
    std::vector<Term> terms;

    Vec2c operator()(double theta) const {
        Vec2c v{};
        for (const auto& t : terms) v = v + std::exp(t.rate * theta) * t.coef;
        return v;
    }
    Vec2c derivative(double theta) const {
        Vec2c v{};
        for (const auto& t : terms) v = v + (t.rate * std::exp(t.rate * theta)) * t.coef;
        return v;
    }
};

/// One Fourier mode of W20(θ) and W11(θ).
struct ModeTerms {
    int n = 0;
    double projection = 0.0; ///< ∫ b_{n0}² b_n dx
    Vec2c rhs20{};           ///< <F̃20, β_n>
    Vec2c rhs11{};           ///< <F̃11, β_n>
    Vec2c e1{};
    Vec2c e2{};
    double e1_residual = 0.0;
    double e2_residual = 0.0;
    ExpSeries w20;
    ExpSeries w11;
};

struct CenterManifoldTerms {
    std::vector<ModeTerms> modes;
    /// W projected onto b_{n0}² (the combination entering g21), at θ = -1 and 0.
    Vec2c w20_m1{}, w20_0{}, w11_m1{}, w11_0{};
    cplx q1_term; ///< Q1
    cplx q2_term; ///< Q2
};

inline CenterManifoldTerms center_manifold_terms(const ModelParams& p, const Eigenpair& ep,
                                                 const QuadraticCoefficients& g) {
    const double len = p.domain_length();
    const double tau = ep.tau_star;
    const cplx iwt(0.0, ep.omega * tau);
    const Vec2c q = ep.q0();
    const Vec2c qb = conj(q);

    std::vector<std::pair<int, double>> contributing;
    if (ep.n0 == 0) {
        contributing = {{0, 1.0 / std::sqrt(len)}};
    } else {
        contributing = {{0, 1.0 / std::sqrt(len)}, {2 * ep.n0, 1.0 / std::sqrt(2.0 * len)}};
    }

    CenterManifoldTerms cm;
    for (const auto& [n, factor] : contributing) {
        ModeTerms mt;
        mt.n = n;
        mt.projection = factor;
        mt.rhs20 = cplx(tau * factor) * g.f20_hat;
        mt.rhs11 = cplx(tau * factor) * g.f11_hat;

        const Mat2c sys20 = (2.0 * iwt) * identity2() + cplx(-1.0) * eta_integral(p, tau, n, 2.0 * iwt);
        const Mat2c sys11 = cplx(-1.0) * eta_integral(p, tau, n, 0.0);
        const LinearSolve s20 = solve2(sys20, mt.rhs20, "E1");
        const LinearSolve s11 = solve2(sys11, mt.rhs11, "E2");
        mt.e1 = s20.x;
        mt.e2 = s11.x;
        mt.e1_residual = s20.residual;
        mt.e2_residual = s11.residual;
        mt.w20.terms.push_back({mt.e1, 2.0 * iwt});
        mt.w11.terms.push_back({mt.e2, 0.0});
        cm.modes.push_back(std::move(mt));
    }

    // center-direction parts live on mode n0
    auto it = std::find_if(cm.modes.begin(), cm.modes.end(), [&](const ModeTerms& m) { return m.n == ep.n0; });
    if (it == cm.modes.end()) {
        ModeTerms mt;
        mt.n = ep.n0;
        mt.projection = 0.0;
        cm.modes.push_back(std::move(mt));
        it = std::prev(cm.modes.end());
    }
    it->w20.terms.push_back({(-g.g20 / iwt) * q, iwt});
    it->w20.terms.push_back({(-std::conj(g.g02) / (3.0 * iwt)) * qb, -iwt});
    it->w11.terms.push_back({(g.g11 / iwt) * q, iwt});
    it->w11.terms.push_back({(-std::conj(g.g11) / iwt) * qb, -iwt});

    for (const auto& m : cm.modes) {
        const cplx w(m.projection);
        cm.w20_m1 = cm.w20_m1 + w * m.w20(-1.0);
        cm.w20_0 = cm.w20_0 + w * m.w20(0.0);
        cm.w11_m1 = cm.w11_m1 + w * m.w11(-1.0);
        cm.w11_0 = cm.w11_0 + w * m.w11(0.0);
    }

    const Equilibrium e = positive_equilibrium(p);
    const double r = p.r();
    const double s = 1.0 + e.m;
    const cplx q1 = ep.q1;
    const cplx q1b = std::conj(q1);
    const cplx ex = std::exp(-iwt);
    const cplx exb = std::conj(ex);

    cm.q1_term = ep.q2 * (6.0 * e.m / (s * s * s * s) * ex - 2.0 / (s * s * s) * (2.0 + ex * ex));

    const Vec2c& a20 = cm.w20_m1;
    const Vec2c& z20 = cm.w20_0;
    const Vec2c& a11 = cm.w11_m1;
    const Vec2c& z11 = cm.w11_0;
    cm.q2_term = ep.q2 * (r * (2.0 * a11[1] + a20[1] + q1b * exb * z20[0] + 2.0 * q1 * ex * z11[0]) +
                          1.0 / (s * s) * (2.0 * a11[0] + a20[0] + z20[0] * exb + 2.0 * z11[0] * ex) -
                          2.0 * e.m / (s * s * s) * (2.0 * ex * a11[0] + exb * a20[0])) -
                 1.0 / p.gamma() * (2.0 * z11[1] + z20[1] + q1b * z20[0] + 2.0 * q1 * z11[0]);
    return cm;
}

/// Max residual of the W20/W11 operator equations, per mode, at θ = 0 (boundary
/// condition) and θ = -1 (differential part).
struct OperatorResiduals {
    double w20_boundary = 0.0;
    double w11_boundary = 0.0;
    double w20_interior = 0.0;
    double w11_interior = 0.0;
};

inline OperatorResiduals w_operator_residuals(const ModelParams& p, const Eigenpair& ep,
                                              const QuadraticCoefficients& g, const CenterManifoldTerms& cm) {
    const double tau = ep.tau_star;
    const cplx iwt(0.0, ep.omega * tau);
    const LinearBlocks lb = linear_blocks(p);
    const Mat2c now = cplx(tau) * gamma_inv(lb.l1, lb.gamma);
    const Mat2c delayed = cplx(tau) * gamma_inv(lb.l2, lb.gamma);
    const Vec2c q = ep.q0();
    const Vec2c qb = conj(q);

    OperatorResiduals res;
    for (const auto& m : cm.modes) {
        const double k2 = p.wave_number_sq(m.n);
        const auto apply = [&](const ExpSeries& w) {
            Vec2c out = now * w(0.0) + delayed * w(-1.0);
            const Vec2c w0 = w(0.0);
            out[0] -= tau * k2 * p.d() * w0[0];
            out[1] -= tau * k2 / p.gamma() * w0[1];
            return out;
        };
        const bool centre = m.n == ep.n0;
        const Vec2c h20 = centre ? g.g20 * q + std::conj(g.g02) * qb : Vec2c{};
        const Vec2c h11 = centre ? g.g11 * q + std::conj(g.g11) * qb : Vec2c{};

        const Vec2c b20 = apply(m.w20) - 2.0 * iwt * m.w20(0.0) - (h20 - m.rhs20);
        const Vec2c b11 = apply(m.w11) - (h11 - m.rhs11);
        res.w20_boundary = std::max(res.w20_boundary, norm_inf(b20));
        res.w11_boundary = std::max(res.w11_boundary, norm_inf(b11));

        const auto h20_theta = [&](double th) {
            return centre ? (g.g20 * std::exp(iwt * th)) * q + (std::conj(g.g02) * std::exp(-iwt * th)) * qb
                          : Vec2c{};
        };
        const auto h11_theta = [&](double th) {
            return centre ? (g.g11 * std::exp(iwt * th)) * q + (std::conj(g.g11) * std::exp(-iwt * th)) * qb
                          : Vec2c{};
        };
        for (double th : {-1.0, -0.5}) {
            const Vec2c i20 = m.w20.derivative(th) - 2.0 * iwt * m.w20(th) - h20_theta(th);
            const Vec2c i11 = m.w11.derivative(th) - h11_theta(th);
            res.w20_interior = std::max(res.w20_interior, norm_inf(i20));
            res.w11_interior = std::max(res.w11_interior, norm_inf(i11));
        }
    }
    return res;
}

enum class HopfDirection { forward, backward };
enum class OrbitStability { stable, unstable };
enum class PeriodTrend { increasing, decreasing };

inline const char* to_string(HopfDirection d) { return d == HopfDirection::forward ? "forward" : "backward"; }
inline const char* to_string(OrbitStability s) { return s == OrbitStability::stable ? "stable" : "unstable"; }
inline const char* to_string(PeriodTrend t) { return t == PeriodTrend::increasing ? "increasing" : "decreasing"; }

struct HopfCoefficients {
    cplx g20, g11, g02, g21;
    cplx c1;
    double mu2 = 0.0;
    double beta2 = 0.0;
    double t2 = 0.0;
    HopfDirection direction = HopfDirection::forward;
    OrbitStability orbit_stability = OrbitStability::stable;
    PeriodTrend period_trend = PeriodTrend::increasing;
};

struct HopfVerdict {
    HopfDirection direction;
    OrbitStability orbit_stability;
    PeriodTrend period_trend;
};

/// Sign rules: μ2 > 0 forward, β2 < 0 stable, T2 > 0 increasing period.
inline HopfVerdict classify_hopf(double mu2, double beta2, double t2) {
    return {mu2 > 0.0 ? HopfDirection::forward : HopfDirection::backward,
            beta2 < 0.0 ? OrbitStability::stable : OrbitStability::unstable,
            t2 > 0.0 ? PeriodTrend::increasing : PeriodTrend::decreasing};
}

struct NormalFormReport {
    TauStarReport tau_star;
    Eigenpair eigen;
    Normalisation normalisation;
    QuadraticCoefficients quadratic;
    CenterManifoldTerms manifold;
    OperatorResiduals residuals;
    cplx lambda_prime; ///< dλ/dτ at (iω, τ*) in original time
    HopfCoefficients coefficients;
};

/// Assembles c1(0), μ2, β2, T2 from the pieces.
inline HopfCoefficients assemble_coefficients(const Eigenpair& ep, const QuadraticCoefficients& g,
                                              const CenterManifoldTerms& cm, const ModeIntegrals& mi,
                                              cplx lambda_prime) {
    HopfCoefficients hc;
    hc.g20 = g.g20;
    hc.g11 = g.g11;
    hc.g02 = g.g02;
    hc.g21 = ep.tau_star * ep.m_norm * (cm.q1_term * mi.b4 + cm.q2_term);
    const double wt = ep.omega * ep.tau_star;
    hc.c1 = cplx(0.0, 1.0 / (2.0 * wt)) *
                (g.g20 * g.g11 - 2.0 * std::norm(g.g11) - std::norm(g.g02) / 3.0) +
            0.5 * hc.g21;
    hc.mu2 = -hc.c1.real() / (ep.tau_star * lambda_prime.real());
    hc.beta2 = 2.0 * hc.c1.real();
    hc.t2 = -(hc.c1.imag() + hc.mu2 * (ep.omega + ep.tau_star * lambda_prime.imag())) / wt;
    const HopfVerdict v = classify_hopf(hc.mu2, hc.beta2, hc.t2);
    hc.direction = v.direction;
    hc.orbit_stability = v.orbit_stability;
    hc.period_trend = v.period_trend;
    return hc;
}

inline NormalFormReport normal_form(const ModelParams& p) {
    const auto hyp = check_hypotheses(p);
    if (!hyp.h1 || !hyp.h2 || !hyp.h3) {
        throw HypothesisViolation(std::string("normal form requires (H1)-(H3); got H1=") + (hyp.h1 ? "1" : "0") +
                                  " H2=" + (hyp.h2 ? "1" : "0") + " H3=" + (hyp.h3 ? "1" : "0"));
    }
    NormalFormReport rep;
    rep.tau_star = tau_star(p);
    rep.eigen = eigenpair(p, rep.tau_star.n0, rep.tau_star.omega, rep.tau_star.tau);
    rep.normalisation = check_normalisation(p, rep.eigen);
    rep.quadratic = g_coefficients(p, rep.eigen);
    rep.manifold = center_manifold_terms(p, rep.eigen, rep.quadratic);
    rep.residuals = w_operator_residuals(p, rep.eigen, rep.quadratic, rep.manifold);
    rep.lambda_prime = root_velocity(p, rep.eigen.n0, cplx(0.0, rep.eigen.omega), rep.eigen.tau_star);
    rep.coefficients = assemble_coefficients(rep.eigen, rep.quadratic, rep.manifold,
                                             mode_integrals(rep.eigen.n0, p.l()), rep.lambda_prime);
    return rep;
}

inline HopfCoefficients hopf_coefficients(const ModelParams& p) { return normal_form(p).coefficients; }

} // namespace mussel
