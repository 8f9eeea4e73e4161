#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"

// Ladder/excursion decomposition of the potential and the deterministic
// schedule N_i = floor(C0 * i^(1+eps) * (i!)^((1+eps)/kappa)),
// f_i = log(N_i/C0) - (1+eps) * log(i).
//
// N_i grows factorially, so it is kept in the log domain for every i and
// materialized as an exact integer only while it fits under the horizon cap
// (those are the only windows that can be simulated anyway).

namespace rwre {

struct Schedule {
    double kappa = 0;
    double epsilon = 0;
    double C0 = 2.0;
    std::uint64_t horizon_cap = 1'000'000;
    bool regime_warning = false; // kappa outside the theorem regime (0, 1/2)
    int i_max = 0;

    // 1-based arrays; index 0 unused.
    std::vector<double> log_N;
    std::vector<double> f;
    std::vector<std::uint64_t> N_exact; // 0 = not materialized under the cap

    bool has_exact(int i) const {
        return i >= 1 && i <= i_max && N_exact[static_cast<std::size_t>(i)] != 0;
    }
    std::uint64_t exact(int i) const {
        if (!has_exact(i))
            throw ScheduleOutOfReach("N_" + std::to_string(i) + " exceeds the horizon cap " +
                                     std::to_string(horizon_cap));
        return N_exact[static_cast<std::size_t>(i)];
    }
};

inline double default_schedule_epsilon(double kappa) { return (1.0 - kappa) / (4.0 * kappa); }

namespace detail {

// floor(C0 * i^(1+eps) * (i!)^m) in extended precision. Products that land
// within 1e-12 relative of an integer are snapped before flooring; the
// remaining misfloor window is far below the 80-bit rounding noise.
inline std::optional<std::uint64_t> exact_schedule_value(double C0, double one_plus_eps, double m,
                                                         int i, std::uint64_t cap) {
    long double fact = 1.0L;
    for (int k = 2; k <= i; ++k) fact *= static_cast<long double>(k);
    const long double x = static_cast<long double>(C0) *
                          powl(static_cast<long double>(i), static_cast<long double>(one_plus_eps)) *
                          powl(fact, static_cast<long double>(m));
    if (!(x < static_cast<long double>(cap) + 1.0L)) return std::nullopt;
    long double snapped = x;
    const long double nearest = roundl(x);
    if (fabsl(x - nearest) <= 1e-12L * fmaxl(1.0L, fabsl(x))) snapped = nearest;
    const auto n = static_cast<std::uint64_t>(floorl(snapped));
    if (n > cap) return std::nullopt;
    return n;
}

} // namespace detail

inline Schedule make_schedule(double kappa, std::optional<double> epsilon, double C0, int i_max,
                              std::uint64_t horizon_cap) {
    if (!(kappa > 0)) throw ConfigError("schedule needs kappa > 0");
    if (!(C0 > 1.0)) throw ConfigError("schedule needs C0 > 1");
    if (i_max < 1) throw ConfigError("schedule needs i_max >= 1");

    Schedule s;
    s.kappa = kappa;
    s.C0 = C0;
    s.horizon_cap = horizon_cap;
    s.i_max = i_max;
    s.regime_warning = !(kappa < 0.5);

    const double eps_hi = (1.0 - kappa) / (2.0 * kappa);
    s.epsilon = epsilon.value_or(default_schedule_epsilon(kappa));
    if (!(s.epsilon > 0.0 && s.epsilon < eps_hi))
        throw EpsilonOutOfRange("epsilon " + std::to_string(s.epsilon) + " outside (0, " +
                                std::to_string(eps_hi) + ")");

    const double one_plus_eps = 1.0 + s.epsilon;
    const double m = one_plus_eps / kappa;
    s.log_N.assign(static_cast<std::size_t>(i_max) + 1, std::numeric_limits<double>::quiet_NaN());
    s.f = s.log_N;
    s.N_exact.assign(static_cast<std::size_t>(i_max) + 1, 0);

    const double logC0 = std::log(C0);
    for (int i = 1; i <= i_max; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (auto n = detail::exact_schedule_value(C0, one_plus_eps, m, i, horizon_cap)) {
            s.N_exact[idx] = *n;
            s.log_N[idx] = std::log(static_cast<double>(*n));
        } else {
            const long double ln = logl(static_cast<long double>(C0)) +
                                   static_cast<long double>(one_plus_eps) *
                                       logl(static_cast<long double>(i)) +
                                   static_cast<long double>(m) *
                                       lgammal(static_cast<long double>(i) + 1.0L);
            s.log_N[idx] = static_cast<double>(ln);
        }
        s.f[idx] = s.log_N[idx] - logC0 - one_plus_eps * std::log(static_cast<double>(i));
    }
    return s;
}

// Weak descending ladder epochs e_0 = 0, e_i = inf{k > e_{i-1} : V(k) <= V(e_{i-1})},
// heights H_i = max over [e_i, e_{i+1}] of V - V(e_i), the threshold indices
// sigma(i) = inf{k > sigma(i-1) : H_k >= f_i} (sigma(0) = -1), and
// b_i = e_{sigma(i)}.
struct LadderStructure {
    std::vector<std::int64_t> e; // e[0] = 0
    std::vector<double> H;       // heights of completed excursions; H[i] goes with [e_i, e_{i+1}]
    std::vector<std::int64_t> sigma; // sigma[0] = -1 sentinel; entries 1..count
    std::vector<std::int64_t> b;     // b[0] unused sentinel; b[i] = e[sigma[i]]

    int sigma_count() const { return static_cast<int>(sigma.size()) - 1; }
};

inline LadderStructure ladder_decomposition(Environment& env, std::int64_t x_max) {
    env.ensure(0, x_max);
    LadderStructure lad;
    lad.e.push_back(0);
    lad.sigma.push_back(-1);
    lad.b.push_back(-1);

    double level = env.potential_at(0);
    double excursion_max = 0.0;
    for (std::int64_t x = 1; x <= x_max; ++x) {
        const double v = env.potential_at(x);
        excursion_max = std::max(excursion_max, v - level);
        if (v <= level) {
            lad.H.push_back(excursion_max);
            lad.e.push_back(x);
            level = v;
            excursion_max = 0.0;
        }
    }
    // the trailing incomplete excursion (if any) is dropped: H_i needs the
    // full interval [e_i, e_{i+1}]
    return lad;
}

// Fill sigma and b for all i whose threshold excursion lies inside the
// computed ladder; a short result just means the window was too small.
inline void sigma_and_b(LadderStructure& lad, const Schedule& sched) {
    lad.sigma.resize(1);
    lad.b.resize(1);
    std::int64_t prev = -1;
    const auto n_excursions = static_cast<std::int64_t>(lad.H.size());
    for (int i = 1; i <= sched.i_max; ++i) {
        const double fi = sched.f[static_cast<std::size_t>(i)];
        std::int64_t k = prev + 1;
        while (k < n_excursions && lad.H[static_cast<std::size_t>(k)] < fi) ++k;
        if (k >= n_excursions) break;
        lad.sigma.push_back(k);
        lad.b.push_back(lad.e[static_cast<std::size_t>(k)]);
        prev = k;
    }
}

struct BBoundRow {
    int i = 0;
    std::int64_t b = 0;
    bool ok = false;
    double margin = 0; // log b_i - (log i + kappa f_i); -inf when b_i = 0
};

inline std::vector<BBoundRow> check_b_bound(const LadderStructure& lad, const Schedule& sched,
                                            double kappa) {
    std::vector<BBoundRow> out;
    for (int i = 1; i <= lad.sigma_count() && i <= sched.i_max; ++i) {
        BBoundRow row;
        row.i = i;
        row.b = lad.b[static_cast<std::size_t>(i)];
        const double rhs =
            std::log(static_cast<double>(i)) + kappa * sched.f[static_cast<std::size_t>(i)];
        if (row.b <= 0) {
            row.ok = true;
            row.margin = -std::numeric_limits<double>::infinity();
        } else {
            const double lhs = std::log(static_cast<double>(row.b));
            row.ok = lhs <= rhs;
            row.margin = lhs - rhs;
        }
        out.push_back(row);
    }
    return out;
}

} // namespace rwre
