#pragma once

/// Dimensionless delayed mussel-algae kinetics:
///
///   m_t = d Δm + m (r a(t-τ) - 1/(1 + m(t-τ)))
///   γ a_t = Δa + α (1 - a) - m a
///
/// on (0, lπ) with homogeneous Neumann conditions.

#include "mussel/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace mussel {

/// Raw parameter values, convenient for designated initialisation.
struct ParamValues {
    double r = 2.0;
    double alpha = 0.1;
    double gamma = 0.5;
    double d = 1.0;
    double tau = 0.0;
    double l = 1.0;
};

/// Validated model parameters. Every field is strictly positive except tau >= 0.
class ModelParams {
public:
    explicit ModelParams(const ParamValues& v) : v_(v) {
        check_positive("r", v.r);
        check_positive("alpha", v.alpha);
        check_positive("gamma", v.gamma);
        check_positive("d", v.d);
        check_positive("l", v.l);
        if (!(v.tau >= 0.0) || !std::isfinite(v.tau)) {
            throw InvalidArgument("parameter tau must be finite and >= 0, got " + std::to_string(v.tau));
        }
    }

    double r() const noexcept { return v_.r; }
    double alpha() const noexcept { return v_.alpha; }
    double gamma() const noexcept { return v_.gamma; }
    double d() const noexcept { return v_.d; }
    double tau() const noexcept { return v_.tau; }
    double l() const noexcept { return v_.l; }
    const ParamValues& values() const noexcept { return v_; }

    /// Squared wave number of Neumann mode n on (0, lπ).
    double wave_number_sq(int n) const noexcept {
        const double k = static_cast<double>(n) / v_.l;
        return k * k;
    }

    double domain_length() const noexcept { return v_.l * std::numbers::pi; }

    ModelParams with_tau(double tau) const {
        ParamValues v = v_;
        v.tau = tau;
        return ModelParams(v);
    }

    ModelParams with_r(double r) const {
        ParamValues v = v_;
        v.r = r;
        return ModelParams(v);
    }

    friend bool operator==(const ModelParams& a, const ModelParams& b) {
        return a.v_.r == b.v_.r && a.v_.alpha == b.v_.alpha && a.v_.gamma == b.v_.gamma &&
               a.v_.d == b.v_.d && a.v_.tau == b.v_.tau && a.v_.l == b.v_.l;
    }

private:
    static void check_positive(const char* name, double value) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw InvalidArgument(std::string("parameter ") + name + " must be finite and > 0, got " +
                                  std::to_string(value));
        }
    }

    ParamValues v_;
};

struct Equilibrium {
    double m = 0.0;
    double a = 0.0;
};

struct Rates {
    double dm = 0.0;
    double da = 0.0;
};

/// Local kinetics. The algae rate already carries the 1/γ factor.
inline Rates reaction_rhs(double m_now, double a_now, double m_delayed, double a_delayed,
                          const ModelParams& p) noexcept {
    return {m_now * (p.r() * a_delayed - 1.0 / (1.0 + m_delayed)),
            (p.alpha() * (1.0 - a_now) - m_now * a_now) / p.gamma()};
}

/// 0 < α < 1 < r < 1/α, evaluated with strict comparisons.
inline bool satisfies_h1(double alpha, double r) noexcept {
    return 0.0 < alpha && alpha < 1.0 && 1.0 < r && r < 1.0 / alpha;
}

inline bool satisfies_h1(const ModelParams& p) noexcept { return satisfies_h1(p.alpha(), p.r()); }

inline void require_h1(const ModelParams& p) {
    if (!satisfies_h1(p)) {
        throw HypothesisViolation("(H1) 0 < alpha < 1 < r < 1/alpha fails for alpha = " +
                                  std::to_string(p.alpha()) + ", r = " + std::to_string(p.r()));
    }
}

/// E*(m*, a*) for raw (α, r); caller guarantees (H1).
inline Equilibrium positive_equilibrium_unchecked(double alpha, double r) noexcept {
    return {alpha * (r - 1.0) / (1.0 - alpha * r), (1.0 - alpha * r) / (r * (1.0 - alpha))};
}

inline Equilibrium positive_equilibrium(const ModelParams& p) {
    require_h1(p);
    return positive_equilibrium_unchecked(p.alpha(), p.r());
}

inline constexpr Equilibrium boundary_equilibrium() noexcept { return {0.0, 1.0}; }

/// δ0(r) = (1 - αr)/(1 - α)
inline double delta0(double alpha, double r) noexcept { return (1.0 - alpha * r) / (1.0 - alpha); }

/// ρ0(r) = r(1 - α)/(γ(r - 1)); undefined at r = 1.
inline double rho0(double alpha, double gamma, double r) noexcept {
    return r * (1.0 - alpha) / (gamma * (r - 1.0));
}

struct HypothesisReport {
    bool h1 = false;
    bool h2 = false;
    bool h3 = false;
    std::vector<std::pair<std::string, double>> details;
    std::vector<std::string> notes;

    double detail(const std::string& name) const {
        for (const auto& [key, value] : details) {
            if (key == name) return value;
        }
        throw InvalidArgument("no detail named " + name);
    }

    bool has_detail(const std::string& name) const {
        for (const auto& kv : details) {
            if (kv.first == name) return true;
        }
        return false;
    }
};

inline HypothesisReport check_hypotheses(const ModelParams& p) {
    HypothesisReport rep;
    const double alpha = p.alpha();
    const double r = p.r();
    const double gamma = p.gamma();
    const double d = p.d();

    rep.h1 = satisfies_h1(alpha, r);
    rep.details.emplace_back("alpha*r", alpha * r);

    if (!(r > 1.0)) {
        rep.notes.push_back("rho0 undefined for r <= 1; (H2) and (H3) reported false");
        return rep;
    }
    if (alpha == 1.0 || alpha * r == 1.0) {
        rep.notes.push_back("positive equilibrium undefined (alpha = 1 or alpha*r = 1); (H2) and (H3) reported false");
        return rep;
    }

    const double del = delta0(alpha, r);
    const double rho = rho0(alpha, gamma, r);
    rep.details.emplace_back("delta0", del);
    rep.details.emplace_back("rho0", rho);
    rep.details.emplace_back("delta0^2-rho0", del * del - rho);
    rep.h2 = del * del - rho < 0.0;

    const Equilibrium e = positive_equilibrium_unchecked(alpha, r);
    const double dtilde0 = alpha * r * (r - 1.0) * e.a;
    const double s = d * gamma * rho - del * del;
    rep.details.emplace_back("d*gamma*rho0-delta0^2", s);
    if (s > 0.0) {
        rep.h3 = true;
    } else if (s < 0.0) {
        const double disc = s * s - 4.0 * d * dtilde0 / (e.m * e.m);
        rep.details.emplace_back("h3_discriminant", disc);
        rep.h3 = disc < 0.0;
    } else {
        rep.notes.push_back("d*gamma*rho0 - delta0^2 = 0 exactly; (H3) reported false");
    }
    if (!rep.h1) rep.notes.push_back("(H1) fails");
    return rep;
}

} // namespace mussel
