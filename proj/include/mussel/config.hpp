#pragma once

// Run configuration: `key = value` files, `--set key=value` overrides and the
// numeric options of every subcommand, validated before any computation.

#include "mussel/error.hpp"
#include "mussel/model.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mussel {

enum class Command { classify, hopf_curve, turing_curve, tau_star, normal_form, simulate, sweep, verify };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::classify: return "classify";
    case Command::hopf_curve: return "hopf-curve";
    case Command::turing_curve: return "turing-curve";
    case Command::tau_star: return "tau-star";
    case Command::normal_form: return "normal-form";
    case Command::simulate: return "simulate";
    case Command::sweep: return "sweep";
    case Command::verify: return "verify";
    }
    return "?";
}

inline std::optional<Command> parse_command(std::string_view name) {
    for (Command c : {Command::classify, Command::hopf_curve, Command::turing_curve, Command::tau_star,
                      Command::normal_form, Command::simulate, Command::sweep, Command::verify}) {
        if (name == to_string(c)) return c;
    }
    return std::nullopt;
}

struct RunOptions {
    // discretisation
    int grid_n = 128;
    double dt = 0.01;
    double t_end = 600.0;
    double sample_interval = 0.1;
    double transient = 0.5;
    // initial data m = m_base + A cos(kx), a = a_base - A cos(kx)
    double amplitude = 0.1;
    double wave_number = 2.0;
    std::optional<double> m_base;
    std::optional<double> a_base;
    bool ode = false;
    // spectral scans
    int n_max = -1; ///< -1: automatic
    int j_max = 3;
    int n_scan = 50;
    // ranges
    double alpha_lo = 0.05;
    double alpha_hi = 0.95;
    double r_lo = 1.0;
    double r_hi = 2.0;
    int resolution = 200;
    int r_count = 41;
    double perturbation = 0.05;
};

struct RunConfig {
    Command command = Command::classify;
    ParamValues params;
    RunOptions options;
    std::filesystem::path out_dir = "out";
};

/// One `key = value` entry with the place it came from, for error messages.
struct Setting {
    std::string key;
    std::string value;
    std::string origin;
};

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

/// Splits "key=value"; `origin` prefixes any error.
inline Setting parse_assignment(std::string_view text, const std::string& origin) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(origin + ": expected key = value, got '" + std::string(text) + "'");
    Setting s{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), origin};
    if (s.key.empty()) throw InvalidArgument(origin + ": empty key");
    if (s.value.empty()) throw InvalidArgument(origin + ": empty value for '" + s.key + "'");
    return s;
}

/// Config text: one assignment per line, '#' starts a comment.
inline std::vector<Setting> parse_config_text(std::string_view text, const std::string& source) {
    std::vector<Setting> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        out.push_back(parse_assignment(line, source + ":" + std::to_string(number)));
    }
    return out;
}

inline std::vector<Setting> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoFailure("error reading config file '" + path.string() + "'");
    return parse_config_text(buf.str(), path.string());
}

namespace detail {

inline double to_double(const Setting& s) {
    double v = 0.0;
    const char* b = s.value.data();
    const char* e = b + s.value.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
        throw InvalidArgument(s.origin + ": '" + s.key + "' expects a finite number, got '" + s.value + "'");
    }
    return v;
}

inline int to_int(const Setting& s) {
    int v = 0;
    const char* b = s.value.data();
    const char* e = b + s.value.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) {
        throw InvalidArgument(s.origin + ": '" + s.key + "' expects an integer, got '" + s.value + "'");
    }
    return v;
}

inline bool to_bool(const Setting& s) {
    if (s.value == "1" || s.value == "true" || s.value == "yes") return true;
    if (s.value == "0" || s.value == "false" || s.value == "no") return false;
    throw InvalidArgument(s.origin + ": '" + s.key + "' expects true/false, got '" + s.value + "'");
}

} // namespace detail

inline void apply_setting(RunConfig& cfg, const Setting& s) {
    auto& o = cfg.options;
    auto& p = cfg.params;
    const std::string& k = s.key;
    using detail::to_double;
    using detail::to_int;
    if (k == "r") p.r = to_double(s);
    else if (k == "alpha") p.alpha = to_double(s);
    else if (k == "gamma") p.gamma = to_double(s);
    else if (k == "d") p.d = to_double(s);
    else if (k == "tau") p.tau = to_double(s);
    else if (k == "l") p.l = to_double(s);
    else if (k == "N") o.grid_n = to_int(s);
    else if (k == "dt") o.dt = to_double(s);
    else if (k == "t_end") o.t_end = to_double(s);
    else if (k == "sample_interval") o.sample_interval = to_double(s);
    else if (k == "transient") o.transient = to_double(s);
    else if (k == "amplitude") o.amplitude = to_double(s);
    else if (k == "wave_number") o.wave_number = to_double(s);
    else if (k == "m_base") o.m_base = to_double(s);
    else if (k == "a_base") o.a_base = to_double(s);
    else if (k == "ode") o.ode = detail::to_bool(s);
    else if (k == "n_max") o.n_max = to_int(s);
    else if (k == "j_max") o.j_max = to_int(s);
    else if (k == "n_scan") o.n_scan = to_int(s);
    else if (k == "alpha_lo") o.alpha_lo = to_double(s);
    else if (k == "alpha_hi") o.alpha_hi = to_double(s);
    else if (k == "r_lo") o.r_lo = to_double(s);
    else if (k == "r_hi") o.r_hi = to_double(s);
    else if (k == "resolution") o.resolution = to_int(s);
    else if (k == "r_count") o.r_count = to_int(s);
    else if (k == "perturbation") o.perturbation = to_double(s);
    else throw InvalidArgument(s.origin + ": unknown key '" + k + "'");
}

/// Checks every numeric option up front; throws InvalidArgument naming the field.
inline void validate(const RunConfig& cfg) {
    const ModelParams probe(cfg.params); // positivity of model parameters
    (void)probe;
    const auto& o = cfg.options;
    const auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw InvalidArgument(msg);
    };
    need(o.grid_n >= 16, "N must be >= 16");
    need(o.dt > 0.0, "dt must be > 0");
    need(o.t_end > 0.0, "t_end must be > 0");
    need(o.sample_interval > 0.0, "sample_interval must be > 0");
    need(o.transient >= 0.0 && o.transient < 1.0, "transient must lie in [0, 1)");
    need(o.amplitude >= 0.0, "amplitude must be >= 0");
    need(o.wave_number >= 0.0, "wave_number must be >= 0");
    need(o.n_max >= -1, "n_max must be >= 0 (or -1 for automatic)");
    need(o.j_max >= 0, "j_max must be >= 0");
    need(o.n_scan >= 0, "n_scan must be >= 0");
    need(o.alpha_lo > 0.0 && o.alpha_hi < 1.0 && o.alpha_lo < o.alpha_hi, "need 0 < alpha_lo < alpha_hi < 1");
    need(o.r_lo < o.r_hi, "need r_lo < r_hi");
    need(o.resolution >= 2, "resolution must be >= 2");
    need(o.r_count >= 2, "r_count must be >= 2");
    need(o.perturbation > -1.0, "perturbation must be > -1");
    if (o.m_base) need(*o.m_base >= 0.0, "m_base must be >= 0");
    if (o.a_base) need(*o.a_base > 0.0, "a_base must be > 0");
}

} // namespace mussel
