#pragma once

// Subcommand pipelines. Each one builds its full OutputBundle in memory; files are
// written only after the computation succeeded.

#include "mussel/config.hpp"
#include "mussel/delay_analysis.hpp"
#include "mussel/linear_analysis.hpp"
#include "mussel/normal_form.hpp"
#include "mussel/oracle_suite.hpp"
#include "mussel/report.hpp"
#include "mussel/simulator.hpp"
#include "mussel/verification.hpp"

#include <ostream>
#include <string>

namespace mussel {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_hypothesis = 3,
    exit_numerical = 4,
    exit_io = 5,
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return exit_usage;
    case ErrorKind::hypothesis_violation: return exit_hypothesis;
    case ErrorKind::numerical_failure: return exit_numerical;
    case ErrorKind::io_failure: return exit_io;
    }
    return exit_numerical;
}

namespace pipeline {

inline json params_json(const ModelParams& p) {
    return json{{"r", num(p.r())},         {"alpha", num(p.alpha())}, {"gamma", num(p.gamma())},
                {"d", num(p.d())},         {"tau", num(p.tau())},     {"l", num(p.l())}};
}

inline json hypotheses_json(const HypothesisReport& h) {
    json details = json::object();
    for (const auto& [k, v] : h.details) details[k] = num(v);
    return json{{"H1", h.h1}, {"H2", h.h2}, {"H3", h.h3}, {"details", details}, {"notes", h.notes}};
}

inline json report_header(const RunConfig& cfg, const ModelParams& p) {
    return json{{"command", to_string(cfg.command)}, {"params", params_json(p)}};
}

inline OutputBundle classify(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    json rep = report_header(cfg, p);
    const auto hyp = check_hypotheses(p);
    rep["hypotheses"] = hypotheses_json(hyp);

    const auto bs = boundary_stability(p, cfg.options.n_scan);
    rep["boundary_equilibrium"] = {{"m", 0}, {"a", 1},
                                   {"verdict", to_string(bs.verdict)},
                                   {"max_real_part", num(bs.max_real_part)},
                                   {"deciding_mode", bs.deciding_mode}};

    CsvTable modes({"n", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "t_tilde", "d_tilde"});
    if (hyp.h1) {
        const Equilibrium e = positive_equilibrium(p);
        rep["positive_equilibrium"] = {{"m", num(e.m)}, {"a", num(e.a)}};
        double max_re = -INFINITY;
        int worst = 0;
        for (int n = 0; n <= cfg.options.n_scan; ++n) {
            const auto c = char_coeffs_no_delay(p, n);
            const auto [l1, l2] = eigenvalues_no_delay(p, n);
            modes.add(n, l1.real(), l1.imag(), l2.real(), l2.imag(), c.t_tilde, c.d_tilde);
            if (l1.real() > max_re) {
                max_re = l1.real();
                worst = n;
            }
        }
        const char* verdict = max_re < 0.0 ? "stable" : (max_re > 0.0 ? "unstable" : "marginal");
        rep["positive_equilibrium"]["delay_free_verdict"] = verdict;
        rep["positive_equilibrium"]["max_real_part"] = num(max_re);
        rep["positive_equilibrium"]["deciding_mode"] = worst;
        if (hyp.h2) {
            const auto tr = turing_analysis(p, cfg.options.n_scan);
            rep["turing"] = {{"g", num(tr.g_r)},
                             {"discriminant", num(tr.lambda_disc)},
                             {"kc_squared", tr.kc_squared ? num(*tr.kc_squared) : json(nullptr)},
                             {"min_mode_value", num(tr.min_mode_value)},
                             {"verdict", to_string(tr.verdict)},
                             {"marginal", tr.marginal},
                             {"unstable_modes", tr.unstable_modes}};
        } else {
            rep["turing"] = {{"verdict", to_string(TuringVerdict::hopf_unstable)}};
        }
    } else {
        rep["positive_equilibrium"] = nullptr;
    }
    OutputBundle b;
    b.add_json("report.json", rep);
    if (modes.rows() > 0) b.add("modes.csv", modes.str());
    return b;
}

inline OutputBundle hopf_curve(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const auto& o = cfg.options;
    CsvTable table({"alpha", "r", "transversality_sign"});
    const auto alphas = verification::linspace(o.alpha_lo, o.alpha_hi, static_cast<std::size_t>(o.resolution));
    std::vector<std::vector<HopfInR>> per(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) { per[i] = hopf_points_in_r(alphas[i], p.gamma()); });
    json points = json::array();
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (const auto& h : per[i]) table.add(alphas[i], h.r, h.transversality_sign);
    }
    json rep = report_header(cfg, p);
    const auto at_alpha = hopf_points_in_r(p.alpha(), p.gamma());
    for (const auto& h : at_alpha) points.push_back({{"r", num(h.r)}, {"transversality_sign", h.transversality_sign}});
    rep["hopf_points_at_alpha"] = points;
    rep["r_star"] = num(r_star(p.alpha()));
    rep["curve_points"] = table.rows();
    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("hopf_curve.csv", table.str());
    return b;
}

inline OutputBundle turing_curve_cmd(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const auto& o = cfg.options;
    const auto pts = turing_curve(o.alpha_lo, o.alpha_hi, p.d(), static_cast<std::size_t>(o.resolution));
    CsvTable table({"alpha", "r", "branch"});
    for (const auto& c : pts) table.add(c.alpha, c.r, c.branch);
    json rep = report_header(cfg, p);
    rep["curve_points"] = table.rows();
    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("turing_curve.csv", table.str());
    return b;
}

inline OutputBundle tau_star_cmd(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const auto& o = cfg.options;
    const auto ts = tau_star(p, o.n_max >= 0 ? std::optional<int>(o.n_max) : std::nullopt, o.j_max);
    CsvTable table({"n", "in_s0", "d_minus_m", "d_plus_m", "omega", "j", "tau", "transversality"});
    for (const auto& m : ts.modes) {
        if (m.crossings.empty()) {
            table.add(m.n, false, m.d_minus_m, m.d_plus_m, std::string(), std::string(), std::string(), std::string());
        }
        for (const auto& c : m.crossings) table.add(m.n, true, m.d_minus_m, m.d_plus_m, c.omega, c.j, c.tau_crit, c.transversality);
    }
    json rep = report_header(cfg, p);
    rep["tau_star"] = num(ts.tau);
    rep["n0"] = ts.n0;
    rep["omega"] = num(ts.omega);
    rep["period_estimate"] = num(2.0 * std::numbers::pi / ts.omega);
    rep["transversality"] = num(ts.transversality);
    rep["S0"] = ts.s0();
    rep["n_max"] = ts.n_max;
    rep["n3"] = ts.n3;
    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("crossings.csv", table.str());
    return b;
}

inline OutputBundle normal_form_cmd(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const NormalFormReport nf = normal_form(p);
    const auto& c = nf.coefficients;
    json rep = report_header(cfg, p);
    rep["tau_star"] = num(nf.eigen.tau_star);
    rep["n0"] = nf.eigen.n0;
    rep["omega"] = num(nf.eigen.omega);
    rep["eigenvector"] = {{"q1", num(nf.eigen.q1)}, {"q2", num(nf.eigen.q2)}, {"M", num(nf.eigen.m_norm)}};
    rep["normalisation"] = {{"pairing", num(nf.normalisation.pairing)},
                            {"conjugate_pairing", num(nf.normalisation.conjugate_pairing)}};
    rep["lambda_prime"] = num(nf.lambda_prime);
    rep["g20"] = num(c.g20);
    rep["g11"] = num(c.g11);
    rep["g02"] = num(c.g02);
    rep["g21"] = num(c.g21);
    rep["c1"] = num(c.c1);
    rep["mu2"] = num(c.mu2);
    rep["beta2"] = num(c.beta2);
    rep["T2"] = num(c.t2);
    rep["direction"] = to_string(c.direction);
    rep["orbit_stability"] = to_string(c.orbit_stability);
    rep["period_trend"] = to_string(c.period_trend);
    const auto& r = nf.residuals;
    rep["residuals"] = {{"w20_boundary", num(r.w20_boundary)}, {"w11_boundary", num(r.w11_boundary)},
                        {"w20_interior", num(r.w20_interior)}, {"w11_interior", num(r.w11_interior)}};
    OutputBundle b;
    b.add_json("report.json", rep);
    return b;
}

inline json orbit_json(const OrbitSummary& s) {
    return json{{"is_periodic", s.is_periodic},
                {"period", s.period ? num(*s.period) : json(nullptr)},
                {"amplitude_m", {num(s.amplitude_m.min), num(s.amplitude_m.max)}},
                {"amplitude_a", {num(s.amplitude_a.min), num(s.amplitude_a.max)}},
                {"spatial_inhomogeneity", num(s.spatial_inhomogeneity)},
                {"peaks", s.peaks},
                {"interval_cv", num(s.interval_cv)},
                {"diagnostic", s.diagnostic}};
}

inline constexpr const char* kPlotScript = R"(# gnuplot: time series and space-time heat map of m
set datafile separator ','
set terminal pngcairo size 900,600
set output 'timeseries.png'
plot 'timeseries.csv' using 1:2 with lines title 'mean m', '' using 1:5 with lines title 'mean a'
set output 'spacetime_m.png'
set view map
splot 'spacetime.csv' using 1:2:3 with image title 'm(x,t)'
)";

inline OutputBundle simulate_cmd(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const auto& o = cfg.options;
    double m_base = 0.0, a_base = 0.0;
    if (o.m_base && o.a_base) {
        m_base = *o.m_base;
        a_base = *o.a_base;
    } else {
        if (!satisfies_h1(p)) {
            throw HypothesisViolation("initial data default to E*, which needs (H1); set m_base and a_base explicitly");
        }
        const Equilibrium e = positive_equilibrium(p);
        m_base = o.m_base.value_or(e.m);
        a_base = o.a_base.value_or(e.a);
    }
    Trajectory tr = [&] {
        if (o.ode) return simulate_ode(p, m_base + o.amplitude, a_base - o.amplitude, o.t_end, o.dt, o.sample_interval);
        const double amp = o.amplitude, k = o.wave_number;
        const HistoryFn hist = [=](double x, double) {
            const double c = amp * std::cos(k * x);
            return std::pair{m_base + c, a_base - c};
        };
        return simulate_pde(p, hist, Grid::uniform(o.grid_n, p.l()), o.t_end, o.dt, o.sample_interval);
    }();
    const OrbitSummary orbit = detect_orbit(tr, o.transient);

    CsvTable series({"t", "mean_m", "min_m", "max_m", "mean_a", "min_a", "max_a", "lyapunov"});
    CsvTable space({"t", "x", "m", "a"});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& m = tr.m[k];
        const auto& a = tr.a[k];
        const auto [mlo, mhi] = std::minmax_element(m.begin(), m.end());
        const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
        const bool positive_a = *alo > 0.0;
        series.add(tr.times[k], spatial_mean(tr.grid, m), *mlo, *mhi, spatial_mean(tr.grid, a), *alo, *ahi,
                   positive_a ? fmt12(lyapunov_value(m, a, p, tr.grid)) : std::string("nan"));
        for (std::size_t i = 0; i < m.size(); ++i) space.add(tr.times[k], tr.grid.x(i), m[i], a[i]);
    }
    const auto& mf = tr.m.back();
    const auto& af = tr.a.back();
    json rep = report_header(cfg, p);
    rep["grid"] = {{"N", tr.grid.intervals()}, {"h", num(tr.grid.spacing())}};
    rep["dt"] = num(tr.dt);
    rep["t_end"] = num(tr.times.back());
    rep["orbit"] = orbit_json(orbit);
    double dev_e = 0.0;
    if (satisfies_h1(p)) {
        const Equilibrium e = positive_equilibrium(p);
        for (std::size_t i = 0; i < mf.size(); ++i) dev_e = std::max({dev_e, std::abs(mf[i] - e.m), std::abs(af[i] - e.a)});
        rep["final_deviation_from_positive_equilibrium"] = num(dev_e);
    }
    double dev_0 = 0.0;
    for (std::size_t i = 0; i < mf.size(); ++i) dev_0 = std::max({dev_0, std::abs(mf[i]), std::abs(af[i] - 1.0)});
    rep["final_deviation_from_boundary_equilibrium"] = num(dev_0);

    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("timeseries.csv", series.str());
    b.add("spacetime.csv", space.str());
    b.add("plot.gp", kPlotScript);
    return b;
}

inline OutputBundle sweep_cmd(const RunConfig& cfg) {
    const ModelParams p(cfg.params);
    const auto& o = cfg.options;
    const auto rs = verification::linspace(o.r_lo, o.r_hi, static_cast<std::size_t>(o.r_count));
    SweepOptions so;
    so.t_end = o.t_end;
    so.dt = o.dt;
    so.perturbation = o.perturbation;
    so.transient_fraction = o.transient;
    so.sample_interval = o.sample_interval;
    const auto rows = amplitude_sweep(p, rs, so);
    CsvTable table({"r", "periodic", "period", "m_min", "m_max", "a_min", "a_max", "error"});
    json rep = report_header(cfg, p);
    int failures = 0;
    for (const auto& row : rows) {
        if (row.summary) {
            const auto& s = *row.summary;
            table.add(row.r, s.is_periodic, s.period ? fmt12(*s.period) : std::string(), s.amplitude_m.min,
                      s.amplitude_m.max, s.amplitude_a.min, s.amplitude_a.max, std::string());
        } else {
            ++failures;
            table.add(row.r, false, std::string(), std::string(), std::string(), std::string(), std::string(), row.error);
        }
    }
    rep["points"] = rows.size();
    rep["failures"] = failures;
    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("sweep.csv", table.str());
    return b;
}

inline OutputBundle verify_cmd(const RunConfig& cfg, bool& all_passed) {
    const ModelParams p(cfg.params);
    const auto checks = verification::run_oracle_suite(p);
    CsvTable table({"check", "status", "error", "tolerance", "note"});
    json list = json::array();
    all_passed = true;
    for (const auto& c : checks) {
        const char* status = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
        if (!c.passed) all_passed = false;
        table.add(c.name, status, c.skipped ? std::string() : fmt12(c.error),
                  c.skipped ? std::string() : fmt12(c.tolerance), c.note);
        list.push_back({{"check", c.name}, {"status", status}, {"error", num(c.error)}, {"tolerance", num(c.tolerance)}});
    }
    json rep = report_header(cfg, p);
    rep["checks"] = list;
    rep["all_passed"] = all_passed;
    OutputBundle b;
    b.add_json("report.json", rep);
    b.add("verify.csv", table.str());
    return b;
}

} // namespace pipeline

/// Runs the configured command and writes its outputs. Errors are reported on `log`
/// and mapped to distinct exit codes; nothing is written when a command fails.
inline int run(const RunConfig& cfg, std::ostream& log) {
    try {
        validate(cfg);
        OutputBundle bundle;
        bool passed = true;
        switch (cfg.command) {
        case Command::classify: bundle = pipeline::classify(cfg); break;
        case Command::hopf_curve: bundle = pipeline::hopf_curve(cfg); break;
        case Command::turing_curve: bundle = pipeline::turing_curve_cmd(cfg); break;
        case Command::tau_star: bundle = pipeline::tau_star_cmd(cfg); break;
        case Command::normal_form: bundle = pipeline::normal_form_cmd(cfg); break;
        case Command::simulate: bundle = pipeline::simulate_cmd(cfg); break;
        case Command::sweep: bundle = pipeline::sweep_cmd(cfg); break;
        case Command::verify: bundle = pipeline::verify_cmd(cfg, passed); break;
        }
        write_bundle(bundle, cfg.out_dir);
        for (const auto& f : bundle.files) log << "wrote " << (cfg.out_dir / f.first).string() << "\n";
        if (!passed) {
            log << "verify: at least one oracle check failed\n";
            return exit_numerical;
        }
        return exit_ok;
    } catch (const Error& e) {
        log << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        log << "error [numerical-failure]: " << e.what() << "\n";
        return exit_numerical;
    }
}

/// Builds a RunConfig from an optional config file and ordered overrides (later wins).
inline RunConfig load_config(Command command, const std::optional<std::filesystem::path>& config_path,
                             const std::vector<std::string>& overrides, const std::filesystem::path& out_dir) {
    RunConfig cfg;
    cfg.command = command;
    cfg.out_dir = out_dir;
    if (config_path) {
        for (const auto& s : read_config_file(*config_path)) apply_setting(cfg, s);
    }
    int i = 0;
    for (const auto& o : overrides) apply_setting(cfg, parse_assignment(o, "--set #" + std::to_string(++i)));
    return cfg;
}

} // namespace mussel
