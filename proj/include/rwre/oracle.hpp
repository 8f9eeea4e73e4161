#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"

// Exact quenched distributions by forward-equation dynamic programming on a
// bounded window. Boundaries absorb and the absorbed mass is tracked as
// "leak", so a capped window stays honest instead of biasing the interior.
// The default window (halfwidth n+1) is exact with zero leak.
//
// Internals run in long double; sum + leak is asserted against 1 within
// 1e-12 after every step.

namespace rwre::oracle {

struct ConservationStats {
    std::atomic<std::uint64_t> checks{0};
    std::atomic<double> max_deviation{0.0};

    void record(double dev) {
        checks.fetch_add(1, std::memory_order_relaxed);
        double cur = max_deviation.load(std::memory_order_relaxed);
        while (dev > cur &&
               !max_deviation.compare_exchange_weak(cur, dev, std::memory_order_relaxed)) {
        }
    }
    void reset() {
        checks.store(0);
        max_deviation.store(0.0);
    }
};

inline ConservationStats& conservation_stats() {
    static ConservationStats stats;
    return stats;
}

struct ExactMarginal {
    std::int64_t n = 0;
    std::int64_t support_lo = 0;
    std::vector<double> probs;
    double leak = 0;
    double conservation_dev = 0; // max |sum + leak - 1| seen across steps

    double prob_at(std::int64_t k) const {
        const std::int64_t idx = k - support_lo;
        if (idx < 0 || idx >= static_cast<std::int64_t>(probs.size())) return 0.0;
        return probs[static_cast<std::size_t>(idx)];
    }
    std::int64_t support_hi() const {
        return support_lo + static_cast<std::int64_t>(probs.size()) - 1;
    }
};

namespace detail {

// Forward iteration of the nearest-neighbour kernel given by up(x).
template <typename UpFn>
ExactMarginal forward_dp(const UpFn& up, std::int64_t start, std::int64_t n,
                         std::int64_t halfwidth, bool strict) {
    if (n < 0) throw ConfigError("exact marginal needs n >= 0");
    if (halfwidth < 1) throw ConfigError("window halfwidth must be >= 1");

    const std::int64_t lo = start - halfwidth, hi = start + halfwidth;
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    std::vector<long double> cur(len, 0.0L), next(len, 0.0L);
    cur[static_cast<std::size_t>(start - lo)] = 1.0L;
    long double leak = 0.0L;
    double max_dev = 0.0;

    for (std::int64_t t = 0; t < n; ++t) {
        std::fill(next.begin(), next.end(), 0.0L);
        for (std::size_t j = 0; j < len; ++j) {
            const long double mass = cur[j];
            if (mass == 0.0L) continue;
            const std::int64_t x = lo + static_cast<std::int64_t>(j);
            const long double pu = static_cast<long double>(up(x));
            const long double up_mass = mass * pu;
            const long double down_mass = mass - up_mass;
            if (j + 1 < len)
                next[j + 1] += up_mass;
            else
                leak += up_mass;
            if (j >= 1)
                next[j - 1] += down_mass;
            else
                leak += down_mass;
        }
        cur.swap(next);

        long double sum = 0.0L;
        for (long double v : cur) sum += v;
        const double dev = std::abs(static_cast<double>(sum + leak - 1.0L));
        max_dev = std::max(max_dev, dev);
        conservation_stats().record(dev);
        if (dev > 1e-12)
            throw InternalError("probability conservation violated: |sum+leak-1| = " +
                                std::to_string(dev));
    }

    ExactMarginal out;
    out.n = n;
    out.support_lo = lo;
    out.probs.resize(len);
    for (std::size_t j = 0; j < len; ++j) out.probs[j] = static_cast<double>(cur[j]);
    out.leak = static_cast<double>(leak);
    out.conservation_dev = max_dev;
    if (strict && out.leak > 1e-9)
        throw WindowTooSmall("leak " + std::to_string(out.leak) +
                             " exceeds 1e-9; enlarge window_halfwidth");
    return out;
}

} // namespace detail

// n-fold push-forward of the point mass at `start` under the environment's
// kernel. Auto window (halfwidth n+1) is exact; a user cap tracks leak.
inline ExactMarginal exact_marginal(Environment& env, std::int64_t start, std::int64_t n,
                                    std::optional<std::int64_t> window_halfwidth = std::nullopt,
                                    bool strict = false) {
    const std::int64_t hw = window_halfwidth.value_or(n + 1);
    env.ensure(start - hw, start + hw);
    const Environment& cenv = env;
    return detail::forward_dp([&cenv](std::int64_t x) { return cenv.omega(x); }, start, n, hw,
                              strict);
}

inline ExactMarginal srw_marginal(std::int64_t start, std::int64_t n,
                                  std::optional<std::int64_t> window_halfwidth = std::nullopt) {
    const std::int64_t hw = window_halfwidth.value_or(n + 1);
    return detail::forward_dp([](std::int64_t) { return 0.5; }, start, n, hw, false);
}

// P(all d RWRE walkers and all p SRW walkers share one site at time n)
// = sum_k prod_j P(S_n^(j) = k) prod_i P(Z_n^(i) = k), by independence.
// Mixed-parity starts give exactly zero.
inline double exact_collision_prob(Environment& env, std::span<const std::int64_t> s_starts,
                                   std::span<const std::int64_t> z_starts, std::int64_t n,
                                   std::optional<std::int64_t> window_halfwidth = std::nullopt,
                                   bool strict = false) {
    if (s_starts.empty() && z_starts.empty())
        throw ConfigError("collision probability needs at least one walker");

    std::map<std::int64_t, ExactMarginal> s_marg, z_marg;
    for (std::int64_t x : s_starts)
        if (!s_marg.count(x)) s_marg.emplace(x, exact_marginal(env, x, n, window_halfwidth, strict));
    for (std::int64_t z : z_starts)
        if (!z_marg.count(z)) z_marg.emplace(z, srw_marginal(z, n, window_halfwidth));

    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();
    auto narrow = [&](const ExactMarginal& m) {
        lo = std::max(lo, m.support_lo);
        hi = std::min(hi, m.support_hi());
    };
    for (auto& [x, m] : s_marg) narrow(m);
    for (auto& [z, m] : z_marg) narrow(m);

    long double acc = 0.0L;
    for (std::int64_t k = lo; k <= hi; ++k) {
        long double term = 1.0L;
        for (std::int64_t x : s_starts) term *= static_cast<long double>(s_marg.at(x).prob_at(k));
        if (term == 0.0L) continue;
        for (std::int64_t z : z_starts) term *= static_cast<long double>(z_marg.at(z).prob_at(k));
        acc += term;
    }
    return static_cast<double>(acc);
}

// P_omega^b[S_k = b]
inline double exact_return_probability(Environment& env, std::int64_t b, std::int64_t k,
                                       std::optional<std::int64_t> window_halfwidth = std::nullopt) {
    ExactMarginal m = exact_marginal(env, b, k, window_halfwidth);
    return m.prob_at(b);
}

// P_omega^start[tau(target) <= horizon]: forward DP with the target site
// absorbing; the window is sized to make the computation exact.
inline double exact_hitting_prob(Environment& env, std::int64_t start, std::int64_t target,
                                 std::int64_t horizon) {
    if (horizon < 0) throw ConfigError("hitting probability needs horizon >= 0");
    if (start == target) return 1.0;

    const std::int64_t lo = std::min(start - horizon - 1, target - 1);
    const std::int64_t hi = std::max(start + horizon + 1, target + 1);
    env.ensure(lo, hi);
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    std::vector<long double> cur(len, 0.0L), next(len, 0.0L);
    cur[static_cast<std::size_t>(start - lo)] = 1.0L;
    long double absorbed = 0.0L;
    const auto target_idx = static_cast<std::size_t>(target - lo);

    for (std::int64_t t = 0; t < horizon; ++t) {
        std::fill(next.begin(), next.end(), 0.0L);
        for (std::size_t j = 0; j < len; ++j) {
            const long double mass = cur[j];
            if (mass == 0.0L || j == target_idx) continue;
            const std::int64_t x = lo + static_cast<std::int64_t>(j);
            const long double pu = static_cast<long double>(env.omega(x));
            if (j + 1 < len) next[j + 1] += mass * pu;
            if (j >= 1) next[j - 1] += mass * (1.0L - pu);
        }
        absorbed += next[target_idx];
        next[target_idx] = 0.0L;
        cur.swap(next);
        if (absorbed > 1.0L - 1e-15L) break; // everything already hit
    }
    return static_cast<double>(absorbed);
}

} // namespace rwre::oracle
