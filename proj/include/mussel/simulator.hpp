#pragma once

// Method-of-lines integration of the delayed reaction-diffusion system on (0, lπ)
// with homogeneous Neumann conditions, plus orbit detection and the Lyapunov
// functional used to monitor convergence to E0.
//
// Scheme (CNAB2): Crank-Nicolson on the diffusion, second-order Adams-Bashforth on
// the reaction with its delayed arguments; the first step falls back to forward
// Euler for the reaction. dt is snapped so that τ is an integer number of steps,
// and the delayed state is read from a ring buffer of exactly τ/dt past steps.

#include "mussel/model.hpp"
#include "mussel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mussel {

class Grid {
public:
    static constexpr int kMinIntervals = 16;

    /// N intervals, N + 1 nodes x_i = i h on [0, lπ].
    static Grid uniform(int intervals, double l) {
        if (intervals < kMinIntervals) {
            throw InvalidArgument("grid needs N >= " + std::to_string(kMinIntervals) + ", got " +
                                  std::to_string(intervals));
        }
        if (!(l > 0.0)) throw InvalidArgument("grid length parameter l must be positive");
        return Grid(intervals, l);
    }

    /// The spatially homogeneous reduction: one node, no diffusion.
    static Grid single_point(double l = 1.0) { return Grid(0, l); }

    int intervals() const noexcept { return n_; }
    std::size_t points() const noexcept { return static_cast<std::size_t>(n_) + 1; }
    double spacing() const noexcept { return h_; }
    double l() const noexcept { return l_; }
    double length() const noexcept { return l_ * std::numbers::pi; }
    bool is_single_point() const noexcept { return n_ == 0; }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) * h_; }

private:
    Grid(int n, double l) : n_(n), h_(n > 0 ? l * std::numbers::pi / n : 0.0), l_(l) {}
    int n_;
    double h_;
    double l_;
};

using Field = std::vector<double>;

struct Trajectory {
    Grid grid;
    ModelParams params;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Field> m;
    std::vector<Field> a;

    std::size_t size() const noexcept { return times.size(); }
};

/// (m, a) at position x and history time t ∈ [-τ, 0].
using HistoryFn = std::function<std::pair<double, double>(double x, double t)>;

/// m* + A cos(kx), a* - A cos(kx), constant in t.
inline HistoryFn cosine_history(const ModelParams& p, double amplitude, double wave_number) {
    const Equilibrium e = positive_equilibrium(p);
    return [=](double x, double) {
        const double c = amplitude * std::cos(wave_number * x);
        return std::pair{e.m + c, e.a - c};
    };
}

inline HistoryFn constant_history(double m0, double a0) {
    return [=](double, double) { return std::pair{m0, a0}; };
}

struct StepperOptions {
    double t_end = 0.0;
    double dt = 0.01;
    double sample_interval = 0.1; ///< spacing of stored samples (rounded to whole steps)
    bool check_fields = true;     ///< positivity and blow-up guards
};

inline constexpr double kNegativityTolerance = 1e-10;
inline constexpr double kBlowUpThreshold = 1e6;

/// Largest step <= requested that divides τ exactly (unchanged when τ = 0).
inline double snap_step(double tau, double dt_requested) {
    if (!(dt_requested > 0.0) || !std::isfinite(dt_requested)) throw InvalidArgument("dt must be positive");
    if (tau == 0.0) return dt_requested;
    const double steps = std::ceil(tau / dt_requested - 1e-9);
    return tau / steps;
}

namespace detail {

/// Factorised (I - θ κ dt Δ_h) with the ghost-point Neumann stencil.
class ImplicitDiffusion {
public:
    ImplicitDiffusion(std::size_t n, double kappa_dt_over_h2) : lower_(n), diag_(n), upper_(n), c_(n) {
        const double s = kappa_dt_over_h2;
        for (std::size_t i = 0; i < n; ++i) {
            diag_[i] = 1.0 + s;
            lower_[i] = -0.5 * s;
            upper_[i] = -0.5 * s;
        }
        if (n > 1) {
            upper_[0] = -s;
            lower_[n - 1] = -s;
        }
        // forward sweep of the Thomas algorithm, done once
        c_[0] = n > 1 ? upper_[0] / diag_[0] : 0.0;
        denom_.assign(n, diag_[0]);
        for (std::size_t i = 1; i < n; ++i) {
            denom_[i] = diag_[i] - lower_[i] * c_[i - 1];
            c_[i] = upper_[i] / denom_[i];
        }
    }

    void solve(Field& rhs) const {
        const std::size_t n = rhs.size();
        rhs[0] /= denom_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) / denom_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_[i] * rhs[i + 1];
    }

private:
    std::vector<double> lower_, diag_, upper_, c_, denom_;
};

/// Δ_h u with mirrored ghost nodes; empty grid spacing means no diffusion.
inline void laplacian(const Field& u, double h, Field& out) {
    const std::size_t n = u.size();
    out.assign(n, 0.0);
    if (n < 2) return;
    const double inv = 1.0 / (h * h);
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
}

inline void check_field(const Field& u, const char* name, double t) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) {
            throw NumericalFailure(std::string("blow-up in ") + name + " at t = " + std::to_string(t) +
                                   ", node " + std::to_string(i) + ", value " + std::to_string(v));
        }
        if (v < -kNegativityTolerance) {
            throw NumericalFailure(std::string("negative ") + name + " at t = " + std::to_string(t) + ", node " +
                                   std::to_string(i) + ", value " + std::to_string(v));
        }
    }
}

} // namespace detail

/// Generic CNAB2 integrator. `kinetics(m, a, m_delayed, a_delayed)` returns Rates;
/// kappa_m and kappa_a are the diffusivities of the already Γ-scaled system.
template <class Kinetics>
Trajectory integrate_imex(const ModelParams& p, const Grid& grid, double kappa_m, double kappa_a, double tau,
                          const HistoryFn& history, const StepperOptions& opt, Kinetics&& kinetics) {
    if (!(opt.t_end > 0.0) || !std::isfinite(opt.t_end)) throw InvalidArgument("t_end must be positive");
    if (!(opt.sample_interval > 0.0)) throw InvalidArgument("sample_interval must be positive");
    const double dt = snap_step(tau, opt.dt);
    const std::size_t lag = tau > 0.0 ? static_cast<std::size_t>(std::llround(tau / dt)) : 0;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(opt.t_end / dt - 1e-9));
    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.sample_interval / dt)));
    const std::size_t n = grid.points();
    const double h = grid.spacing();

    // ring of the last lag+1 states; slot k holds step (current - lag + k) after rotation
    std::vector<Field> ring_m(lag + 1, Field(n)), ring_a(lag + 1, Field(n));
    for (std::size_t k = 0; k <= lag; ++k) {
        const double t = -static_cast<double>(lag - k) * dt;
        for (std::size_t i = 0; i < n; ++i) {
            const auto [mv, av] = history(grid.x(i), t);
            ring_m[k][i] = mv;
            ring_a[k][i] = av;
        }
    }
    std::size_t head = lag; // index of the current state

    Trajectory traj{grid, p, dt, {}, {}, {}};
    traj.times.reserve(steps / stride + 2);
    auto store = [&](double t) {
        traj.times.push_back(t);
        traj.m.push_back(ring_m[head]);
        traj.a.push_back(ring_a[head]);
    };
    store(0.0);
    if (opt.check_fields) {
        detail::check_field(ring_m[head], "m", 0.0);
        detail::check_field(ring_a[head], "a", 0.0);
    }

    const bool diffuse = !grid.is_single_point();
    std::optional<detail::ImplicitDiffusion> solve_m, solve_a;
    if (diffuse) {
        solve_m.emplace(n, kappa_m * dt / (h * h));
        solve_a.emplace(n, kappa_a * dt / (h * h));
    }

    Field react_m(n), react_a(n), prev_m(n), prev_a(n), lap(n), rhs_m(n), rhs_a(n);
    bool have_prev = false;
    for (std::size_t step = 0; step < steps; ++step) {
        const Field& cur_m = ring_m[head];
        const Field& cur_a = ring_a[head];
        const std::size_t del = (head + 1) % (lag + 1); // oldest slot = step - lag
        const Field& del_m = lag > 0 ? ring_m[del] : cur_m;
        const Field& del_a = lag > 0 ? ring_a[del] : cur_a;
        for (std::size_t i = 0; i < n; ++i) {
            const Rates rt = kinetics(cur_m[i], cur_a[i], del_m[i], del_a[i]);
            react_m[i] = rt.dm;
            react_a[i] = rt.da;
        }
        const double w_now = have_prev ? 1.5 : 1.0;
        const double w_old = have_prev ? -0.5 : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rhs_m[i] = cur_m[i] + dt * (w_now * react_m[i] + w_old * prev_m[i]);
            rhs_a[i] = cur_a[i] + dt * (w_now * react_a[i] + w_old * prev_a[i]);
        }
        if (diffuse) {
            detail::laplacian(cur_m, h, lap);
            for (std::size_t i = 0; i < n; ++i) rhs_m[i] += 0.5 * dt * kappa_m * lap[i];
            detail::laplacian(cur_a, h, lap);
            for (std::size_t i = 0; i < n; ++i) rhs_a[i] += 0.5 * dt * kappa_a * lap[i];
            solve_m->solve(rhs_m);
            solve_a->solve(rhs_a);
        }
        std::swap(prev_m, react_m);
        std::swap(prev_a, react_a);
        have_prev = true;

        // the oldest slot is no longer needed once its reaction term is formed
        head = del;
        ring_m[head] = rhs_m;
        ring_a[head] = rhs_a;
        const double t = static_cast<double>(step + 1) * dt;
        if (opt.check_fields) {
            detail::check_field(ring_m[head], "m", t);
            detail::check_field(ring_a[head], "a", t);
        }
        if ((step + 1) % stride == 0 || step + 1 == steps) store(t);
    }
    return traj;
}

inline Trajectory simulate_pde(const ModelParams& p, const HistoryFn& history, const Grid& grid, double t_end,
                               double dt, double sample_interval = 0.1) {
    if (grid.is_single_point()) throw InvalidArgument("simulate_pde needs a spatial grid");
    if (std::abs(grid.l() - p.l()) > 1e-15 * p.l()) throw InvalidArgument("grid l differs from model l");
    StepperOptions opt{t_end, dt, sample_interval, true};
    return integrate_imex(p, grid, p.d(), 1.0 / p.gamma(), p.tau(), history, opt,
                          [&p](double m, double a, double md, double ad) { return reaction_rhs(m, a, md, ad, p); });
}

inline Trajectory simulate_ode(const ModelParams& p, double m0, double a0, double t_end, double dt,
                               double sample_interval = 0.1) {
    StepperOptions opt{t_end, dt, sample_interval, true};
    return integrate_imex(p, Grid::single_point(p.l()), 0.0, 0.0, p.tau(), constant_history(m0, a0), opt,
                          [&p](double m, double a, double md, double ad) { return reaction_rhs(m, a, md, ad, p); });
}

/// Trapezoidal rule over the grid nodes; the single-point grid returns the value itself.
inline double trapezoid(const Grid& grid, const Field& f) {
    if (grid.is_single_point()) return f.at(0);
    const std::size_t n = f.size();
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < n; ++i) s += f[i];
    return s * grid.spacing();
}

/// V(m, a) = γ r ∫ (a - 1 - ln a) dx + ∫ m dx.
inline double lyapunov_value(const Field& m, const Field& a, const ModelParams& p, const Grid& grid) {
    if (m.size() != a.size() || m.size() != grid.points()) throw InvalidArgument("field sizes do not match grid");
    Field integrand(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!(a[i] > 0.0)) {
            throw InvalidArgument("lyapunov_value: a must be positive, got " + std::to_string(a[i]) + " at node " +
                                  std::to_string(i));
        }
        integrand[i] = p.gamma() * p.r() * (a[i] - 1.0 - std::log(a[i])) + m[i];
    }
    return trapezoid(grid, integrand);
}

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct OrbitSummary {
    bool is_periodic = false;
    std::optional<double> period;
    Range amplitude_m;
    Range amplitude_a;
    double spatial_inhomogeneity = 0.0;
    std::size_t peaks = 0;
    double interval_cv = 0.0;
    std::string diagnostic;
};

inline constexpr double kPeriodCvThreshold = 0.02;
inline constexpr double kOrbitAmplitudeThreshold = 1e-5;
inline constexpr double kSustainRatio = 0.9;

inline double spatial_mean(const Grid& grid, const Field& f) {
    if (grid.is_single_point()) return f.at(0);
    return trapezoid(grid, f) / grid.length();
}

/// Spatial standard deviation over spatial mean (0 on a single-point grid).
inline double relative_spread(const Grid& grid, const Field& f) {
    if (grid.is_single_point()) return 0.0;
    const double mean = spatial_mean(grid, f);
    Field sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = (f[i] - mean) * (f[i] - mean);
    const double sd = std::sqrt(std::max(0.0, trapezoid(grid, sq) / grid.length()));
    return mean != 0.0 ? sd / std::abs(mean) : sd;
}

/// Local maxima of a sampled signal, refined by a parabola through the three
/// neighbouring samples. Returns (time, value) pairs.
inline std::vector<std::pair<double, double>> refined_peaks(const std::vector<double>& t, const std::vector<double>& y) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
        const double curv = ym - 2.0 * y0 + yp;
        double shift = 0.0;
        if (curv < 0.0) shift = 0.5 * (ym - yp) / curv;
        shift = std::clamp(shift, -0.5, 0.5);
        const double step = shift >= 0.0 ? t[i + 1] - t[i] : t[i] - t[i - 1];
        out.emplace_back(t[i] + shift * step, y0 - 0.25 * (ym - yp) * shift);
    }
    return out;
}

/// Periodicity of the spatial mean of m after discarding the leading transient_fraction.
inline OrbitSummary detect_orbit(const Trajectory& traj, double transient_fraction = 0.5) {
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) {
        throw InvalidArgument("transient_fraction must lie in [0, 1)");
    }
    OrbitSummary s;
    if (traj.size() < 2) {
        s.diagnostic = "trajectory too short";
        return s;
    }
    const double t0 = traj.times.front() + transient_fraction * (traj.times.back() - traj.times.front());
    const auto first = static_cast<std::size_t>(
        std::lower_bound(traj.times.begin(), traj.times.end(), t0) - traj.times.begin());

    std::vector<double> t, mean_m;
    s.amplitude_m = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    s.amplitude_a = s.amplitude_m;
    for (std::size_t k = first; k < traj.size(); ++k) {
        t.push_back(traj.times[k]);
        mean_m.push_back(spatial_mean(traj.grid, traj.m[k]));
        for (double v : traj.m[k]) s.amplitude_m = {std::min(s.amplitude_m.min, v), std::max(s.amplitude_m.max, v)};
        for (double v : traj.a[k]) s.amplitude_a = {std::min(s.amplitude_a.min, v), std::max(s.amplitude_a.max, v)};
        s.spatial_inhomogeneity = std::max({s.spatial_inhomogeneity, relative_spread(traj.grid, traj.m[k]),
                                            relative_spread(traj.grid, traj.a[k])});
    }
    if (t.size() < 5) {
        s.diagnostic = "too few samples after the transient";
        return s;
    }

    const auto peaks = refined_peaks(t, mean_m);
    s.peaks = peaks.size();
    const auto [lo, hi] = std::minmax_element(mean_m.begin(), mean_m.end());
    const double swing = *hi - *lo;
    if (swing < kOrbitAmplitudeThreshold) {
        s.diagnostic = "no oscillation above the amplitude threshold";
        return s;
    }
    if (peaks.size() < 3) {
        s.diagnostic = "fewer than 3 peaks after the transient";
        return s;
    }
    std::vector<double> intervals;
    for (std::size_t i = 1; i < peaks.size(); ++i) intervals.push_back(peaks[i].first - peaks[i - 1].first);
    const double mean_iv = std::accumulate(intervals.begin(), intervals.end(), 0.0) / intervals.size();
    double var = 0.0;
    for (double v : intervals) var += (v - mean_iv) * (v - mean_iv);
    var /= static_cast<double>(intervals.size());
    s.interval_cv = std::sqrt(var) / mean_iv;
    if (!(s.interval_cv < kPeriodCvThreshold)) {
        s.diagnostic = "peak intervals irregular (cv = " + std::to_string(s.interval_cv) + ")";
        return s;
    }

    // a decaying oscillation is not an orbit: compare the last excursion with the first
    const double centre = std::accumulate(mean_m.begin(), mean_m.end(), 0.0) / mean_m.size();
    const double first_exc = peaks.front().second - centre;
    const double last_exc = peaks.back().second - centre;
    if (!(first_exc > 0.0) || last_exc < kSustainRatio * first_exc) {
        s.diagnostic = "oscillation decays after the transient";
        return s;
    }
    s.is_periodic = true;
    s.period = mean_iv;
    s.diagnostic = "periodic";
    return s;
}

struct SweepRow {
    double r = 0.0;
    std::optional<OrbitSummary> summary;
    std::string error;
};

struct SweepOptions {
    double t_end = 3000.0;
    double dt = 0.01;
    double perturbation = 0.05; ///< relative kick to m* at t <= 0
    double transient_fraction = 0.5;
    double sample_interval = 0.1;
    unsigned threads = 0; ///< 0: thread_count()
};

/// One ODE run per r from m = (1 + perturbation) m*, a = a*. Failures are recorded per row.
inline std::vector<SweepRow> amplitude_sweep(const ModelParams& base, const std::vector<double>& r_values,
                                             const SweepOptions& opt = {}) {
    std::vector<SweepRow> rows(r_values.size());
    parallel_for(
        r_values.size(),
        [&](std::size_t i) {
            SweepRow& row = rows[i];
            row.r = r_values[i];
            try {
                const ModelParams p = base.with_r(r_values[i]);
                const Equilibrium e = positive_equilibrium(p);
                const Trajectory tr = simulate_ode(p, e.m * (1.0 + opt.perturbation), e.a, opt.t_end, opt.dt,
                                                   opt.sample_interval);
                row.summary = detect_orbit(tr, opt.transient_fraction);
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
        },
        opt.threads == 0 ? thread_count() : opt.threads);
    return rows;
}

} // namespace mussel
