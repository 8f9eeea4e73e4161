#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

// Environment laws and realized environments.
//
// A law is the distribution of the site up-probability omega_0 on a support
// bounded away from 0 and 1 (ellipticity). rho_0 = (1-omega_0)/omega_0 is the
// odds ratio; its moment transform lambda(s) = E[rho_0^s] determines the
// regime through the unique positive root of lambda(s) = 1 (the exponent
// kappa), which exists when E[log rho_0] < 0 and some sites push left.

namespace rwre {

enum class LawKind { two_point, finite_support, uniform_interval };

inline const char* law_kind_name(LawKind k) {
    switch (k) {
        case LawKind::two_point: return "two_point";
        case LawKind::finite_support: return "finite_support";
        case LawKind::uniform_interval: return "uniform_interval";
    }
    return "?";
}

struct Atom {
    double value = 0; // omega value in (0,1)
    double prob = 0;
};

struct EnvironmentLaw {
    LawKind kind = LawKind::two_point;
    std::vector<Atom> atoms;   // discrete kinds
    double lo = 0, hi = 0;     // uniform_interval bounds
    double epsilon0 = 0;       // distance of the support from {0,1}

    // Two-point (and any finite-support) laws have arithmetic log rho; the
    // displacement-exponent probe flags them.
    bool arithmetic_support() const { return kind != LawKind::uniform_interval; }
};

namespace detail {

inline void validate_discrete(const std::vector<Atom>& atoms) {
    if (atoms.empty()) throw ConfigError("law needs at least one atom");
    double sum = 0;
    for (const Atom& a : atoms) {
        if (!(a.value > 0.0 && a.value < 1.0))
            throw SupportOutsideUnitInterval("atom value " + std::to_string(a.value) +
                                             " outside (0,1)");
        if (!(a.prob >= 0.0)) throw ConfigError("atom probability must be nonnegative");
        sum += a.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ProbSumMismatch("atom probabilities sum to " + std::to_string(sum));
}

} // namespace detail

inline EnvironmentLaw make_two_point_law(std::vector<Atom> atoms) {
    if (atoms.size() > 2) throw ConfigError("two_point law takes at most two atoms");
    detail::validate_discrete(atoms);
    EnvironmentLaw law;
    law.kind = LawKind::two_point;
    law.atoms = std::move(atoms);
    double vmin = 1, vmax = 0;
    for (const Atom& a : law.atoms) {
        vmin = std::min(vmin, a.value);
        vmax = std::max(vmax, a.value);
    }
    law.epsilon0 = std::min(vmin, 1.0 - vmax);
    if (!(law.epsilon0 > 0.0)) throw EllipticityViolated("support touches {0,1}");
    return law;
}

inline EnvironmentLaw make_finite_support_law(std::vector<Atom> atoms) {
    detail::validate_discrete(atoms);
    EnvironmentLaw law;
    law.kind = LawKind::finite_support;
    law.atoms = std::move(atoms);
    double vmin = 1, vmax = 0;
    for (const Atom& a : law.atoms) {
        vmin = std::min(vmin, a.value);
        vmax = std::max(vmax, a.value);
    }
    law.epsilon0 = std::min(vmin, 1.0 - vmax);
    if (!(law.epsilon0 > 0.0)) throw EllipticityViolated("support touches {0,1}");
    return law;
}

inline EnvironmentLaw make_uniform_law(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("uniform_interval needs lo < hi");
    if (!(lo > 0.0 && hi < 1.0))
        throw SupportOutsideUnitInterval("uniform_interval bounds outside (0,1)");
    EnvironmentLaw law;
    law.kind = LawKind::uniform_interval;
    law.lo = lo;
    law.hi = hi;
    law.epsilon0 = std::min(lo, 1.0 - hi);
    if (!(law.epsilon0 > 0.0)) throw EllipticityViolated("support touches {0,1}");
    return law;
}

// The closed-form two-point family on {3/4, 1/4}: P(omega=3/4) = q has
// kappa = log(q/(1-q)) / log 3, so q = 3^kappa / (1 + 3^kappa).
inline EnvironmentLaw two_point_law_for_kappa(double kappa) {
    double y = std::pow(3.0, kappa);
    double q = y / (1.0 + y);
    return make_two_point_law({{0.75, q}, {0.25, 1.0 - q}});
}

inline double log_rho_of_omega(double omega) { return std::log((1.0 - omega) / omega); }

namespace detail {

// Adaptive Simpson with absolute tolerance; throws instead of returning a
// silently unconverged value.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) < 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= 48)
        throw QuadratureNotConverged("adaptive Simpson did not reach tolerance");
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0);
}

} // namespace detail

// lambda(s) = E[rho_0^s]. Exact sum for discrete kinds, adaptive Simpson at
// absolute tolerance 1e-13 for uniform_interval. lambda(0) = 1 by definition.
inline double rho_moment(const EnvironmentLaw& law, double s) {
    if (!std::isfinite(s)) throw ConfigError("rho_moment: s must be finite");
    if (s == 0.0) return 1.0;
    if (law.kind == LawKind::uniform_interval) {
        auto f = [s](double w) { return std::pow((1.0 - w) / w, s); };
        return detail::integrate(f, law.lo, law.hi, 1e-13) / (law.hi - law.lo);
    }
    double acc = 0;
    for (const Atom& a : law.atoms) acc += a.prob * std::pow((1.0 - a.value) / a.value, s);
    return acc;
}

inline double mean_log_rho(const EnvironmentLaw& law) {
    if (law.kind == LawKind::uniform_interval) {
        auto f = [](double w) { return log_rho_of_omega(w); };
        return detail::integrate(f, law.lo, law.hi, 1e-13) / (law.hi - law.lo);
    }
    double acc = 0;
    for (const Atom& a : law.atoms) acc += a.prob * log_rho_of_omega(a.value);
    return acc;
}

struct KappaResult {
    double kappa = 0;        // unique positive root of lambda(s) = 1
    double residual = 0;     // |lambda(kappa) - 1|
    double mean_log_rho = 0; // E[log rho_0], negative in the transient-right regime
};

// Root of lambda(s) = 1 on s > 0: bracket by doubling (cap s = 64), then
// bisect. Convexity with lambda(0) = 1 and lambda'(0) = E[log rho_0] < 0
// makes the root unique when the bracket exists.
inline KappaResult solve_kappa(const EnvironmentLaw& law) {
    const double elr = mean_log_rho(law);

    bool rho_identically_one = false;
    if (law.kind == LawKind::uniform_interval) {
        rho_identically_one = false; // an interval law is never a point mass
    } else {
        rho_identically_one = true;
        for (const Atom& a : law.atoms)
            if (a.prob > 0 && a.value != 0.5) rho_identically_one = false;
    }
    if (rho_identically_one)
        throw DegenerateLaw("rho_0 == 1 almost surely: lambda(s) == 1 for every s");

    if (elr >= 0.0)
        throw NotTransientRight("E[log rho_0] = " + std::to_string(elr) +
                                " >= 0: walk is not transient to the right");

    constexpr double kCap = 64.0;
    double lo = 0.0; // lambda(0) = 1 with lambda < 1 just right of 0
    double hi = 1.0 / 64.0;
    while (hi <= kCap && rho_moment(law, hi) <= 1.0) {
        lo = hi;
        hi *= 2.0;
    }
    if (hi > kCap)
        throw NoRootBelowCap("lambda(s) <= 1 for every s <= 64: no positive root "
                             "(no site pushes left strongly enough)");

    double mid = 0.5 * (lo + hi), val = 0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        val = rho_moment(law, mid);
        if (std::abs(val - 1.0) <= 1e-13) break;
        (val > 1.0 ? hi : lo) = mid;
        if (hi - lo < 1e-15 * std::max(1.0, mid)) break;
    }
    KappaResult out;
    out.kappa = mid;
    out.residual = std::abs(rho_moment(law, mid) - 1.0);
    out.mean_log_rho = elr;
    if (out.residual > 1e-12)
        throw QuadratureNotConverged("kappa residual " + std::to_string(out.residual) +
                                     " above 1e-12");
    return out;
}

// Site draw: a pure function of (seed, x), so windows can grow in any order
// and always agree bitwise with a fresh sample.
inline double sample_omega(const EnvironmentLaw& law, std::uint64_t seed, std::int64_t x) {
    const std::uint64_t key =
        rng::derive_key(seed, {rng::kSaltEnvironmentSite, static_cast<std::uint64_t>(x)});
    const double u = rng::to_unit(key);
    if (law.kind == LawKind::uniform_interval) return law.lo + u * (law.hi - law.lo);
    double cum = 0;
    for (const Atom& a : law.atoms) {
        cum += a.prob;
        if (u < cum) return a.value;
    }
    return law.atoms.back().value;
}

// A realized environment over a window of Z containing 0, with the potential
// V cached. V(0) = 0, V(x) - V(x-1) = log rho_x for x >= 1 and
// V(x) - V(x+1) = -log rho_{x+1} for x <= -1. Value type: copies are cheap
// relative to simulation cost and each simulation task owns its own copy, so
// no synchronization is ever needed.
class Environment {
public:
    static Environment sample(const EnvironmentLaw& law, std::uint64_t seed, std::int64_t lo,
                              std::int64_t hi) {
        if (!(lo <= 0 && 0 <= hi)) throw ConfigError("environment window must contain 0");
        Environment env;
        env.law_ = law;
        env.seed_ = seed;
        env.extendable_ = true;
        env.lo_ = lo;
        env.hi_ = hi;
        env.omega_.resize(static_cast<std::size_t>(hi - lo + 1));
        for (std::int64_t x = lo; x <= hi; ++x)
            env.omega_[static_cast<std::size_t>(x - lo)] = sample_omega(law, seed, x);
        env.rebuild_potential();
        return env;
    }

    // Fixed-omega environment for tests and hand-built kernels; cannot extend.
    static Environment from_omega(std::int64_t lo, std::vector<double> omega) {
        const std::int64_t hi = lo + static_cast<std::int64_t>(omega.size()) - 1;
        if (!(lo <= 0 && 0 <= hi)) throw ConfigError("environment window must contain 0");
        for (double w : omega)
            if (!(w > 0.0 && w < 1.0))
                throw SupportOutsideUnitInterval("fixed omega outside (0,1)");
        Environment env;
        env.extendable_ = false;
        env.lo_ = lo;
        env.hi_ = hi;
        env.omega_ = std::move(omega);
        env.rebuild_potential();
        return env;
    }

    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return hi_; }
    const EnvironmentLaw& law() const { return law_; }
    std::uint64_t seed() const { return seed_; }
    bool extendable() const { return extendable_; }
    const std::vector<double>& omega_values() const { return omega_; }
    const std::vector<double>& potential_values() const { return V_; }

    bool covers(std::int64_t x) const { return x >= lo_ && x <= hi_; }

    double omega(std::int64_t x) const {
        if (!covers(x))
            throw WindowTooSmall("site " + std::to_string(x) + " outside window [" +
                                 std::to_string(lo_) + "," + std::to_string(hi_) + "]");
        return omega_[static_cast<std::size_t>(x - lo_)];
    }

    // Hot-path accessor: extends the window when the walker steps outside it.
    double omega_extending(std::int64_t x) {
        if (x < lo_ || x > hi_) [[unlikely]]
            ensure(x, x);
        return omega_[static_cast<std::size_t>(x - lo_)];
    }

    double potential(std::int64_t x) {
        if (x < lo_ || x > hi_) ensure(x, x);
        return V_[static_cast<std::size_t>(x - lo_)];
    }

    double potential_at(std::int64_t x) const {
        if (!covers(x))
            throw WindowTooSmall("potential: site " + std::to_string(x) + " outside window");
        return V_[static_cast<std::size_t>(x - lo_)];
    }

    // Grow to cover [want_lo, want_hi]. Right growth doubles the span
    // (walkers are right-transient); left growth adds sqrt-of-span chunks.
    void ensure(std::int64_t want_lo, std::int64_t want_hi) {
        if (want_lo >= lo_ && want_hi <= hi_) return;
        if (!extendable_)
            throw WindowTooSmall("fixed environment cannot extend to [" +
                                 std::to_string(want_lo) + "," + std::to_string(want_hi) + "]");
        const std::int64_t span = hi_ - lo_ + 1;
        std::int64_t new_lo = lo_, new_hi = hi_;
        if (want_hi > hi_) new_hi = std::max(want_hi, hi_ + std::max<std::int64_t>(span, 64));
        if (want_lo < lo_) {
            const auto chunk = static_cast<std::int64_t>(std::sqrt(static_cast<double>(span)));
            new_lo = std::min(want_lo, lo_ - std::max<std::int64_t>(chunk, 64));
        }

        std::vector<double> omega(static_cast<std::size_t>(new_hi - new_lo + 1));
        for (std::int64_t x = new_lo; x < lo_; ++x)
            omega[static_cast<std::size_t>(x - new_lo)] = sample_omega(law_, seed_, x);
        std::copy(omega_.begin(), omega_.end(), omega.begin() + (lo_ - new_lo));
        for (std::int64_t x = hi_ + 1; x <= new_hi; ++x)
            omega[static_cast<std::size_t>(x - new_lo)] = sample_omega(law_, seed_, x);

        // Extend V with the same left-to-right / right-to-left recurrences a
        // fresh build uses, so extension is bitwise identical to resampling.
        std::vector<double> V(omega.size());
        std::copy(V_.begin(), V_.end(), V.begin() + (lo_ - new_lo));
        for (std::int64_t x = hi_ + 1; x <= new_hi; ++x)
            V[static_cast<std::size_t>(x - new_lo)] =
                V[static_cast<std::size_t>(x - 1 - new_lo)] +
                log_rho_of_omega(omega[static_cast<std::size_t>(x - new_lo)]);
        for (std::int64_t x = lo_ - 1; x >= new_lo; --x)
            V[static_cast<std::size_t>(x - new_lo)] =
                V[static_cast<std::size_t>(x + 1 - new_lo)] -
                log_rho_of_omega(omega[static_cast<std::size_t>(x + 1 - new_lo)]);

        lo_ = new_lo;
        hi_ = new_hi;
        omega_ = std::move(omega);
        V_ = std::move(V);
    }

private:
    void rebuild_potential() {
        V_.assign(omega_.size(), 0.0);
        const std::int64_t zero = -lo_;
        V_[static_cast<std::size_t>(zero)] = 0.0;
        for (std::int64_t x = 1; x <= hi_; ++x)
            V_[static_cast<std::size_t>(zero + x)] =
                V_[static_cast<std::size_t>(zero + x - 1)] +
                log_rho_of_omega(omega_[static_cast<std::size_t>(zero + x)]);
        for (std::int64_t x = -1; x >= lo_; --x)
            V_[static_cast<std::size_t>(zero + x)] =
                V_[static_cast<std::size_t>(zero + x + 1)] -
                log_rho_of_omega(omega_[static_cast<std::size_t>(zero + x + 1)]);
    }

    EnvironmentLaw law_;
    std::uint64_t seed_ = 0;
    bool extendable_ = false;
    std::int64_t lo_ = 0, hi_ = 0;
    std::vector<double> omega_;
    std::vector<double> V_;
};

inline bool same_realization(const Environment& a, const Environment& b) {
    return a.lo() == b.lo() && a.hi() == b.hi() && a.omega_values() == b.omega_values() &&
           a.potential_values() == b.potential_values();
}

} // namespace rwre
