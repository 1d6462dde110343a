#pragma once

// Independent oracles for the closed forms. Nothing here calls into the
// closed-form code paths except to obtain a starting guess or the value under test;
// every quantity is rebuilt from the raw Jacobian entries of the kinetics.

#include "mussel/model.hpp"
#include "mussel/parallel.hpp"
#include "mussel/simulator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace mussel::verification {

using cplx = std::complex<double>;

/// E* from the raw kinetics: m* is the sign change of r a(m) - 1/(1+m) with
/// a(m) = α/(α+m), bracketed on (0, M) and refined by bisection to machine precision.
inline Equilibrium equilibrium_oracle(double alpha, double r) {
    if (!satisfies_h1(alpha, r)) throw HypothesisViolation("equilibrium oracle requires (H1)");
    const auto f = [&](double m) { return r * alpha / (alpha + m) - 1.0 / (1.0 + m); };
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalFailure("equilibrium oracle: no sign change");
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    const double m = 0.5 * (lo + hi);
    return {m, alpha / (alpha + m)};
}

/// Raw Jacobian blocks of (m(r a_τ - 1/(1+m_τ)), α(1-a) - m a) at E*.
struct Jacobian {
    double now_mm, now_ma, now_am, now_aa;
    double del_mm, del_ma;
};

inline Jacobian jacobian(double alpha, double r) {
    const Equilibrium e = equilibrium_oracle(alpha, r);
    // ∂/∂m of m(r a - 1/(1+m)) at E* vanishes (the bracket is zero)
    return {0.0, 0.0, -e.a, -alpha - e.m, e.m / ((1.0 + e.m) * (1.0 + e.m)), r * e.m};
}

/// Characteristic function det(λΓ + k²D - J_now - J_del e^{-λτ}) of mode n.
inline cplx char_det(const ModelParams& p, int n, cplx lambda, double tau) {
    const Jacobian j = jacobian(p.alpha(), p.r());
    const double k2 = (n / p.l()) * (n / p.l());
    const cplx ex = std::exp(-lambda * tau);
    const cplx a11 = lambda + p.d() * k2 - j.now_mm - j.del_mm * ex;
    const cplx a12 = -j.now_ma - j.del_ma * ex;
    const cplx a21 = -j.now_am;
    const cplx a22 = p.gamma() * lambda + k2 - j.now_aa;
    return a11 * a22 - a12 * a21;
}

struct DetDerivatives {
    cplx value, d_lambda, d_tau;
};

inline DetDerivatives char_det_derivatives(const ModelParams& p, int n, cplx lambda, double tau) {
    const Jacobian j = jacobian(p.alpha(), p.r());
    const double k2 = (n / p.l()) * (n / p.l());
    const cplx ex = std::exp(-lambda * tau);
    const cplx a11 = lambda + p.d() * k2 - j.now_mm - j.del_mm * ex;
    const cplx a12 = -j.now_ma - j.del_ma * ex;
    const cplx a21 = -j.now_am;
    const cplx a22 = p.gamma() * lambda + k2 - j.now_aa;
    DetDerivatives out;
    out.value = a11 * a22 - a12 * a21;
    out.d_lambda = (1.0 + tau * j.del_mm * ex) * a22 + a11 * p.gamma() - (tau * j.del_ma * ex) * a21;
    out.d_tau = (lambda * j.del_mm * ex) * a22 - (lambda * j.del_ma * ex) * a21;
    return out;
}

inline constexpr double kNewtonTolerance = 1e-12;
inline constexpr double kRootResidual = 1e-10;

/// Complex Newton with analytic derivative; nullopt on divergence.
inline std::optional<cplx> newton_root(const ModelParams& p, int n, double tau, cplx guess, int max_iter = 50) {
    cplx z = guess;
    for (int it = 0; it < max_iter; ++it) {
        const DetDerivatives d = char_det_derivatives(p, n, z, tau);
        if (std::abs(d.d_lambda) == 0.0) return std::nullopt;
        const cplx step = d.value / d.d_lambda;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(step) < kNewtonTolerance * std::max(1.0, std::abs(z))) {
            if (std::abs(char_det(p, n, z, tau)) < kRootResidual) return z;
        }
    }
    return std::nullopt;
}

struct RootTrack {
    int mode = 0;
    std::vector<double> tau_values;
    std::vector<cplx> roots;
    std::vector<bool> converged;
    std::optional<double> crossing_tau;
    std::optional<cplx> crossing_root;
    std::optional<double> crossing_slope; ///< d Re λ / dτ at the crossing

    bool all_converged() const { return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; }); }
};

inline constexpr double kCrossingBisectionTolerance = 1e-8;
inline constexpr int kMaxHalvings = 8;

/// Continues the root starting from `start` at tau_from over `steps` uniform increments.
/// A failed Newton solve retries with halved sub-steps; if that also fails the point is
/// marked unconverged and the track continues from the last good root.
inline RootTrack newton_track_root(const ModelParams& p, int n, double tau_from, double tau_to, int steps,
                                   cplx start) {
    if (steps < 1) throw InvalidArgument("newton_track_root needs steps >= 1");
    if (!(tau_from >= 0.0 && tau_to >= 0.0)) throw InvalidArgument("delays must be nonnegative");
    RootTrack track;
    track.mode = n;
    const auto first = newton_root(p, n, tau_from, start);
    if (!first) throw NumericalFailure("newton_track_root: starting guess does not converge");

    cplx last = *first;
    double last_tau = tau_from;
    track.tau_values.push_back(tau_from);
    track.roots.push_back(last);
    track.converged.push_back(true);

    const double h = (tau_to - tau_from) / steps;
    for (int s = 1; s <= steps; ++s) {
        const double target = tau_from + h * s;
        std::optional<cplx> root;
        for (int halvings = 0; halvings <= kMaxHalvings && !root; ++halvings) {
            const int sub = 1 << halvings;
            cplx z = last;
            bool ok = true;
            for (int k = 1; k <= sub && ok; ++k) {
                const auto next = newton_root(p, n, last_tau + (target - last_tau) * k / sub, z);
                if (next) {
                    z = *next;
                } else {
                    ok = false;
                }
            }
            if (ok) root = z;
        }
        track.tau_values.push_back(target);
        if (root) {
            track.roots.push_back(*root);
            track.converged.push_back(true);
            last = *root;
            last_tau = target;
        } else {
            track.roots.push_back(last);
            track.converged.push_back(false);
        }
    }

    // first sign change of Re λ between consecutive converged points
    for (std::size_t i = 1; i < track.roots.size(); ++i) {
        if (!track.converged[i] || !track.converged[i - 1]) continue;
        const double r0 = track.roots[i - 1].real();
        const double r1 = track.roots[i].real();
        if ((r0 < 0.0) == (r1 < 0.0)) continue;
        double lo = track.tau_values[i - 1], hi = track.tau_values[i];
        cplx z_lo = track.roots[i - 1];
        const bool rising = r0 < 0.0;
        while (std::abs(hi - lo) > kCrossingBisectionTolerance) {
            const double mid = 0.5 * (lo + hi);
            const auto zm = newton_root(p, n, mid, z_lo);
            if (!zm) break;
            if ((zm->real() < 0.0) == rising) {
                lo = mid;
                z_lo = *zm;
            } else {
                hi = mid;
            }
        }
        const double tc = 0.5 * (lo + hi);
        const auto zc = newton_root(p, n, tc, z_lo);
        if (zc) {
            const DetDerivatives d = char_det_derivatives(p, n, *zc, tc);
            track.crossing_tau = tc;
            track.crossing_root = *zc;
            track.crossing_slope = (-d.d_tau / d.d_lambda).real();
        }
        break;
    }
    return track;
}

/// Rightmost `count` eigenvalues of Γ^{-1}(D Δ_h + J) on the Neumann grid (τ = 0),
/// sorted by descending real part. count = 0 returns the whole spectrum.
inline std::vector<cplx> discrete_spectrum(const ModelParams& p, const Grid& grid, std::size_t count = 0) {
    if (grid.is_single_point()) throw InvalidArgument("discrete_spectrum needs a spatial grid");
    const Jacobian j = jacobian(p.alpha(), p.r());
    const auto n = static_cast<Eigen::Index>(grid.points());
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const auto lap = [&](Eigen::Index i, Eigen::Index k) {
        if (i == k) return -2.0 * inv_h2;
        if (std::abs(i - k) != 1) return 0.0;
        if (i == 0 || i == n - 1) return 2.0 * inv_h2;
        return inv_h2;
    };
    const double g = p.gamma();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = std::max<Eigen::Index>(0, i - 1); k <= std::min(n - 1, i + 1); ++k) {
            a(i, k) += p.d() * lap(i, k);
            a(n + i, n + k) += lap(i, k) / g;
        }
        a(i, i) += j.now_mm + j.del_mm;
        a(i, n + i) += j.now_ma + j.del_ma;
        a(n + i, i) += j.now_am / g;
        a(n + i, n + i) += j.now_aa / g;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("dense eigenvalue solve failed");
    std::vector<cplx> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    if (count > 0 && count < ev.size()) ev.resize(count);
    return ev;
}

/// Eigenvalue of `spectrum` nearest to `target`.
inline cplx nearest(const std::vector<cplx>& spectrum, cplx target) {
    if (spectrum.empty()) throw InvalidArgument("empty spectrum");
    return *std::min_element(spectrum.begin(), spectrum.end(),
                             [&](cplx x, cplx y) { return std::abs(x - target) < std::abs(y - target); });
}

enum class Region { non_h1, hopf_unstable, t_a, t_b, t_c, t_d };

inline const char* to_string(Region r) {
    switch (r) {
    case Region::non_h1: return "non-H1";
    case Region::hopf_unstable: return "hopf-unstable";
    case Region::t_a: return "T_a";
    case Region::t_b: return "T_b";
    case Region::t_c: return "T_c";
    case Region::t_d: return "T_d";
    }
    return "?";
}

/// Brute-force quantities of one (α, r) cell, all from the raw Jacobian.
struct CellProbe {
    double trace0 = 0.0;   ///< T̃0, the negated trace term of the n = 0 quadratic
    double g = 0.0;        ///< k² coefficient of D̃
    double lambda = 0.0;   ///< g² - 4 d D̃0
    double min_dtilde = 0.0; ///< min of D̃ over a dense k² scan
};

inline constexpr std::size_t kK2Samples = 4000;

inline CellProbe probe_cell(double alpha, double r, double d, double gamma) {
    const Jacobian j = jacobian(alpha, r);
    // D̃(k²) = det(k² diag(d, 1) - J) with J the delay-free Jacobian
    const double j11 = j.now_mm + j.del_mm, j12 = j.now_ma + j.del_ma, j21 = j.now_am, j22 = j.now_aa;
    const auto dtilde = [&](double k2) { return (d * k2 - j11) * (k2 - j22) - j12 * j21; };
    CellProbe c;
    c.trace0 = -(j22 + gamma * j11);
    const double d0 = dtilde(0.0);
    c.g = (dtilde(1.0) - dtilde(-1.0)) / 2.0;
    c.lambda = c.g * c.g - 4.0 * d * d0;
    // the minimiser, when positive, is below -j22/... ; scan generously
    const double k2_max = 2.0 * (std::abs(j11) / d + std::abs(j22) + 1.0);
    c.min_dtilde = d0;
    for (std::size_t i = 1; i <= kK2Samples; ++i) {
        c.min_dtilde = std::min(c.min_dtilde, dtilde(k2_max * static_cast<double>(i) / kK2Samples));
    }
    return c;
}

inline Region classify_cell(double alpha, double r, double d, double gamma) {
    if (!satisfies_h1(alpha, r)) return Region::non_h1;
    const CellProbe c = probe_cell(alpha, r, d, gamma);
    if (c.trace0 < 0.0) return Region::hopf_unstable;
    if (c.g >= 0.0) return Region::t_d;
    if (c.lambda > 0.0) return Region::t_b;
    // below the Turing window Λ is still rising with r, above it Λ is falling
    const double dr = 1e-7 * r;
    const double r_up = r + dr;
    double slope_sign = 1.0;
    if (satisfies_h1(alpha, r_up)) {
        slope_sign = probe_cell(alpha, r_up, d, gamma).lambda - c.lambda;
    } else {
        slope_sign = c.lambda - probe_cell(alpha, r - dr, d, gamma).lambda;
    }
    return slope_sign > 0.0 ? Region::t_a : Region::t_c;
}

struct RegionMap {
    std::vector<double> alphas;
    std::vector<double> rs;
    std::vector<Region> cells; ///< row-major, cells[i * rs.size() + j] at (alphas[i], rs[j])
    std::vector<double> min_dtilde;
    std::vector<double> trace0;

    Region at(std::size_t i, std::size_t j) const { return cells.at(i * rs.size() + j); }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
}

inline RegionMap grid_classify(double alpha_lo, double alpha_hi, double r_lo, double r_hi, double d, double gamma,
                               std::size_t resolution) {
    if (resolution < 2) throw InvalidArgument("grid_classify needs resolution >= 2");
    if (!(alpha_lo < alpha_hi && r_lo < r_hi)) throw InvalidArgument("grid_classify needs increasing ranges");
    if (!(d > 0.0 && gamma > 0.0)) throw InvalidArgument("d and gamma must be positive");
    RegionMap map;
    map.alphas = linspace(alpha_lo, alpha_hi, resolution);
    map.rs = linspace(r_lo, r_hi, resolution);
    const std::size_t cells = resolution * resolution;
    map.cells.assign(cells, Region::non_h1);
    map.min_dtilde.assign(cells, 0.0);
    map.trace0.assign(cells, 0.0);
    parallel_for(resolution, [&](std::size_t i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const std::size_t k = i * resolution + j;
            map.cells[k] = classify_cell(map.alphas[i], map.rs[j], d, gamma);
            if (map.cells[k] != Region::non_h1) {
                const CellProbe c = probe_cell(map.alphas[i], map.rs[j], d, gamma);
                map.min_dtilde[k] = c.min_dtilde;
                map.trace0[k] = c.trace0;
            }
        }
    });
    return map;
}

/// First Lyapunov coefficient of the homogeneous (n0 = 0) delay Hopf point by the
/// invariant formula c1 = ½ p·[C(q,q,q̄) + B(q̄,h20) + 2B(q,h11)] in time scaled by τ,
/// with p normalised by p·Δ'(iω)q = 1 and the spatial factor ∫b0⁴ = 1/(lπ).
inline cplx lyapunov_coefficient_homogeneous(const ModelParams& p, double omega, double tau) {
    const Equilibrium e = equilibrium_oracle(p.alpha(), p.r());
    const Jacobian j = jacobian(p.alpha(), p.r());
    const double g = p.gamma();
    const double s = 1.0 + e.m;
    const double w = omega * tau;
    using M2 = Eigen::Matrix2cd;
    using V2 = Eigen::Vector2cd;

    // Δ(λ) = λ I - τ Γ^{-1}(J_now + J_del e^{-λ})
    const auto delta = [&](cplx lam) {
        const cplx ex = std::exp(-lam);
        M2 m;
        m << lam - tau * (j.now_mm + j.del_mm * ex), -tau * (j.now_ma + j.del_ma * ex), -tau * j.now_am / g,
            lam - tau * j.now_aa / g;
        return m;
    };
    const cplx iw(0.0, w);
    const M2 d0 = delta(iw);
    V2 q;
    q << -d0(0, 1), d0(0, 0);
    if (std::abs(q(0)) < 1e-14) q << d0(1, 1), -d0(1, 0);
    q /= q(0);
    V2 pl;
    pl << d0(1, 0), -d0(0, 0);
    if (std::abs(pl.norm()) < 1e-14) pl << d0(1, 1), -d0(0, 1);
    M2 dprime = M2::Identity();
    dprime(0, 0) += tau * j.del_mm * std::exp(-iw);
    dprime(0, 1) += tau * j.del_ma * std::exp(-iw);
    pl /= (pl.transpose() * dprime * q)(0, 0);

    // second and third derivatives of the kinetics; args are (m, a) now and delayed
    struct State {
        cplx m, a, md, ad;
    };
    const auto b = [&](const State& u, const State& v) {
        const cplx f1 = p.r() * (u.m * v.ad + v.m * u.ad) + (u.m * v.md + v.m * u.md) / (s * s) -
                        2.0 * e.m / (s * s * s) * u.md * v.md;
        const cplx f2 = -(u.m * v.a + v.m * u.a) / g;
        V2 out;
        out << tau * f1, tau * f2;
        return out;
    };
    const auto c3 = [&](const State& u, const State& v, const State& x) {
        const cplx f1 = -2.0 / (s * s * s) * (u.m * v.md * x.md + v.m * u.md * x.md + x.m * u.md * v.md) +
                        6.0 * e.m / (s * s * s * s) * u.md * v.md * x.md;
        V2 out;
        out << tau * f1, 0.0;
        return out;
    };
    const auto eigenstate = [&](const V2& v, cplx rate) {
        const cplx ex = std::exp(-rate);
        return State{v(0), v(1), v(0) * ex, v(1) * ex};
    };
    const State sq = eigenstate(q, iw);
    const State sqb = eigenstate(q.conjugate(), -iw);
    const V2 h20 = delta(2.0 * iw).inverse() * b(sq, sq);
    const V2 h11 = delta(0.0).inverse() * b(sq, sqb);
    const State s20 = eigenstate(h20, 2.0 * iw);
    const State s11 = eigenstate(h11, 0.0);
    const V2 total = c3(sq, sq, sqb) + b(sqb, s20) + 2.0 * b(sq, s11);
    return 0.5 * (pl.transpose() * total)(0, 0) / p.domain_length();
}

} // namespace mussel::verification
