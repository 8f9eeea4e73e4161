#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

// Lockstep quenched simulation of d RWRE walkers S^(j) and p SRW walkers
// Z^(i). Each walker draws from its own counter-based stream keyed by
// (master_seed, replica, walker); the counter is the time coordinate, so a
// replica can be replayed walker by walker.
//
// A collision is an integer time at which every tracked walker occupies the
// same site; nearest-neighbour steps preserve (position + time) mod 2, so
// collisions require same-parity starts.

namespace rwre {

struct EnsembleState {
    std::int64_t time = 0;
    std::vector<std::int64_t> s_pos, z_pos;
    std::vector<std::int64_t> s_start, z_start;
    std::vector<rng::Stream> s_stream, z_stream;

    int d() const { return static_cast<int>(s_pos.size()); }
    int p() const { return static_cast<int>(z_pos.size()); }
};

// Walker stream indices: S walkers take 0..d-1, Z walkers d..d+p-1.
inline EnsembleState init_ensemble(const std::vector<std::int64_t>& s_starts,
                                   const std::vector<std::int64_t>& z_starts,
                                   std::uint64_t master_seed, std::uint64_t replica_id) {
    EnsembleState st;
    st.s_pos = s_starts;
    st.s_start = s_starts;
    st.z_pos = z_starts;
    st.z_start = z_starts;
    const auto d = static_cast<std::uint64_t>(s_starts.size());
    for (std::uint64_t j = 0; j < d; ++j)
        st.s_stream.push_back(rng::walker_stream(master_seed, replica_id, j));
    for (std::uint64_t i = 0; i < z_starts.size(); ++i)
        st.z_stream.push_back(rng::walker_stream(master_seed, replica_id, d + i));
    return st;
}

// One synchronous step: each S walker moves +1 with probability
// omega(current site), each Z walker +1 with probability 1/2.
inline void step(EnsembleState& st, Environment& env) {
    const auto n = static_cast<std::uint64_t>(st.time);
    for (std::size_t j = 0; j < st.s_pos.size(); ++j) {
        const double w = env.omega_extending(st.s_pos[j]);
        st.s_pos[j] += (st.s_stream[j].unit(n) < w) ? 1 : -1;
    }
    for (std::size_t i = 0; i < st.z_pos.size(); ++i)
        st.z_pos[i] += (st.z_stream[i].unit(n) < 0.5) ? 1 : -1;
    ++st.time;
}

inline bool all_coincide(const EnsembleState& st, std::int64_t& where) {
    const std::int64_t ref = st.s_pos.empty() ? st.z_pos.front() : st.s_pos.front();
    for (std::int64_t x : st.s_pos)
        if (x != ref) return false;
    for (std::int64_t x : st.z_pos)
        if (x != ref) return false;
    where = ref;
    return true;
}

// Drive the ensemble to `horizon`, invoking on_collision(time, site) at every
// simultaneous coincidence, starting with the current time.
template <typename OnCollision>
void run_lockstep(EnsembleState& st, Environment& env, std::int64_t horizon,
                  OnCollision&& on_collision) {
    std::int64_t where = 0;
    if (all_coincide(st, where)) on_collision(st.time, where);
    while (st.time < horizon) {
        step(st, env);
        if (all_coincide(st, where)) on_collision(st.time, where);
    }
}

struct CollisionRecord {
    std::vector<std::int64_t> times;
    std::vector<std::int64_t> locations;
    std::int64_t truncated_at = 0;
};

inline CollisionRecord run_collisions(EnsembleState& st, Environment& env, std::int64_t horizon) {
    if (horizon < 0) throw ConfigError("collision run needs horizon >= 0");
    CollisionRecord rec;
    rec.truncated_at = horizon;
    run_lockstep(st, env, horizon, [&rec](std::int64_t t, std::int64_t x) {
        rec.times.push_back(t);
        rec.locations.push_back(x);
    });
    return rec;
}

// tau(target) = min{k : S_k = target} for a single RWRE walker, counted from
// the walker's current time; none if the target is not hit by `cap` steps.
inline std::optional<std::int64_t> hitting_time(Environment& env, std::int64_t start,
                                                std::int64_t target, std::int64_t cap,
                                                rng::Stream stream, std::int64_t time0 = 0) {
    if (cap < 0) throw ConfigError("hitting time needs cap >= 0");
    std::int64_t pos = start;
    for (std::int64_t k = 0; k <= cap; ++k) {
        if (pos == target) return k;
        const double w = env.omega_extending(pos);
        pos += (stream.unit(static_cast<std::uint64_t>(time0 + k)) < w) ? 1 : -1;
    }
    return std::nullopt;
}

// Parity-adjusted horizon: N' = N - 1{N - b odd}, so N' and b have the same
// parity and Z can sit on b at time N'.
inline std::int64_t parity_adjusted_horizon(std::int64_t N, std::int64_t b) {
    return N - (((N - b) % 2 + 2) % 2);
}

// U = min{k >= N : Z_k = level}, capped at 2N. The whole ensemble advances in
// lockstep; the condition is checked on the first SRW walker.
inline std::optional<std::int64_t> meeting_time_U(EnsembleState& st, Environment& env,
                                                  std::int64_t level, std::int64_t N) {
    if (st.p() < 1) throw ConfigError("meeting time needs p >= 1");
    if (N < 0) throw ConfigError("meeting time needs N >= 0");
    if (st.time > N)
        throw ConfigError("meeting time: ensemble already past N");
    while (st.time < N) step(st, env);
    if (st.z_pos.front() == level) return st.time;
    while (st.time < 2 * N) {
        step(st, env);
        if (st.z_pos.front() == level) return st.time;
    }
    return std::nullopt;
}

} // namespace rwre
