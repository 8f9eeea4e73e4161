#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/io.hpp"
#include "rwre/landscape.hpp"
#include "rwre/oracle.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/walkers.hpp"

#ifndef RWRE_BUILD_ID
#define RWRE_BUILD_ID "dev"
#endif

// Statistical probes. The theorems being probed are almost-sure statements
// about infinite time; every report states that the numbers below are
// finite-horizon proxies (count medians, survival fractions, decay fits),
// not reproductions of the theorems.
//
// All probes are deterministic functions of (config, master_seed): replicas
// fan out in parallel but each index owns its result slot and aggregation is
// an ordered reduce, so the thread count never changes a report.

namespace rwre {

using ordered_json = nlohmann::ordered_json;

struct ScheduleParams {
    std::optional<double> kappa; // default: solved from the law
    std::optional<double> epsilon;
    double C0 = 2.0;
    int i_max = 16;
    std::uint64_t horizon_cap = 1'000'000;
};

struct ExperimentConfig {
    EnvironmentLaw law;
    int d = 1, p = 1;
    std::vector<std::int64_t> starts; // size d+p once resolved; empty = all zeros
    std::int64_t horizon = 1'000'000;
    int replicas = 200;
    int environments = 20;
    std::uint64_t master_seed = 1;
    int threads = parallel::default_threads();
    ScheduleParams schedule;

    // probe-specific knobs
    std::vector<int> i_list;
    std::vector<std::int64_t> n_grid;
    std::int64_t x_start = 0;
    double envelope_constant = 2.0;
    std::string mode = "dp";
};

inline std::vector<std::int64_t> resolved_starts(const ExperimentConfig& cfg) {
    const auto want = static_cast<std::size_t>(cfg.d + cfg.p);
    if (cfg.starts.empty()) return std::vector<std::int64_t>(want, 0);
    if (cfg.starts.size() != want)
        throw ConfigError("starts has " + std::to_string(cfg.starts.size()) +
                          " entries; d+p = " + std::to_string(want));
    return cfg.starts;
}

inline bool parity_mixed(const std::vector<std::int64_t>& starts) {
    if (starts.empty()) return false;
    const std::int64_t r = ((starts.front() % 2) + 2) % 2;
    for (std::int64_t s : starts)
        if (((s % 2) + 2) % 2 != r) return true;
    return false;
}

inline Schedule schedule_for(const ExperimentConfig& cfg) {
    const double kappa =
        cfg.schedule.kappa ? *cfg.schedule.kappa : solve_kappa(cfg.law).kappa;
    return make_schedule(kappa, cfg.schedule.epsilon, cfg.schedule.C0, cfg.schedule.i_max,
                         cfg.schedule.horizon_cap);
}

inline ordered_json law_to_json(const EnvironmentLaw& law) {
    ordered_json j;
    j["kind"] = law_kind_name(law.kind);
    if (law.kind == LawKind::uniform_interval) {
        j["lo"] = law.lo;
        j["hi"] = law.hi;
    } else {
        ordered_json atoms = ordered_json::array();
        for (const Atom& a : law.atoms) atoms.push_back({a.value, a.prob});
        j["atoms"] = atoms;
    }
    j["epsilon0"] = law.epsilon0;
    return j;
}

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["law"] = law_to_json(cfg.law);
    j["d"] = cfg.d;
    j["p"] = cfg.p;
    j["starts"] = resolved_starts(cfg);
    j["horizon"] = cfg.horizon;
    j["replicas"] = cfg.replicas;
    j["environments"] = cfg.environments;
    j["seed"] = cfg.master_seed;
    j["threads"] = cfg.threads;
    ordered_json sched;
    if (cfg.schedule.kappa)
        sched["kappa"] = *cfg.schedule.kappa;
    else
        sched["kappa"] = "auto";
    if (cfg.schedule.epsilon)
        sched["epsilon"] = *cfg.schedule.epsilon;
    else
        sched["epsilon"] = "auto";
    sched["C0"] = cfg.schedule.C0;
    sched["i_max"] = cfg.schedule.i_max;
    sched["horizon_cap"] = cfg.schedule.horizon_cap;
    j["schedule"] = sched;
    if (!cfg.i_list.empty()) j["i_list"] = cfg.i_list;
    if (!cfg.n_grid.empty()) j["n_grid"] = cfg.n_grid;
    j["x_start"] = cfg.x_start;
    j["envelope_constant"] = cfg.envelope_constant;
    j["mode"] = cfg.mode;
    return j;
}

inline ordered_json report_skeleton(const std::string& probe, const ExperimentConfig& cfg) {
    ordered_json j;
    j["schema_version"] = 1;
    j["tool"] = ordered_json{{"name", "rwre-lab"}, {"build", RWRE_BUILD_ID}};
    j["probe"] = probe;
    j["seed"] = cfg.master_seed;
    j["note"] =
        "Finite-horizon statistical proxy: the probed statements are almost-sure, "
        "infinite-time properties; medians, survival fractions and decay fits stand in "
        "for them at this horizon.";
    j["config"] = config_to_json(cfg);
    return j;
}

// ---------------------------------------------------------------------------
// collisions probe
// ---------------------------------------------------------------------------

struct ReplicaCollisionStats {
    int env_index = 0;
    int replica = 0;
    std::int64_t count = 0;
    std::int64_t last_time = -1; // -1 when no collision happened
    std::int64_t late_count = 0; // collisions with time in (horizon/2, horizon]
};

struct CollisionExperimentResult {
    std::vector<ReplicaCollisionStats> rows; // ordered by (env, replica)
    double pooled_median_count = 0;
    double late_fraction = 0; // fraction of replicas with a collision in (T/2, T]
    std::vector<double> per_env_median_count;
    bool parity_mixed = false;
    std::int64_t late_from = 0;
};

inline CollisionExperimentResult collision_experiment(const ExperimentConfig& cfg) {
    if (cfg.d + cfg.p < 2)
        throw ConfigError("collision experiment needs d+p >= 2 tracked walkers");
    if (cfg.d < 0 || cfg.p < 0) throw ConfigError("d and p must be nonnegative");
    if (cfg.replicas < 1 || cfg.environments < 1 || cfg.horizon < 1)
        throw ConfigError("collision experiment needs horizon, replicas, environments >= 1");

    const auto starts = resolved_starts(cfg);
    const std::vector<std::int64_t> s_starts(starts.begin(), starts.begin() + cfg.d);
    const std::vector<std::int64_t> z_starts(starts.begin() + cfg.d, starts.end());

    CollisionExperimentResult res;
    res.parity_mixed = parity_mixed(starts);
    res.late_from = cfg.horizon / 2;

    const std::int64_t total = static_cast<std::int64_t>(cfg.environments) * cfg.replicas;
    res.rows.resize(static_cast<std::size_t>(total));

    const std::int64_t n_blocks = std::min<std::int64_t>(total, cfg.threads * 8);
    parallel::parallel_for(0, n_blocks, cfg.threads, [&](std::int64_t block) {
        const std::int64_t g0 = total * block / n_blocks;
        const std::int64_t g1 = total * (block + 1) / n_blocks;
        int cur_env = -1;
        Environment env;
        for (std::int64_t g = g0; g < g1; ++g) {
            const int e = static_cast<int>(g / cfg.replicas);
            if (e != cur_env) {
                env = Environment::sample(cfg.law, rng::environment_seed(cfg.master_seed,
                                                                         static_cast<std::uint64_t>(e)),
                                          -1024, 1024);
                cur_env = e;
            }
            EnsembleState st = init_ensemble(s_starts, z_starts, cfg.master_seed,
                                             static_cast<std::uint64_t>(g));
            ReplicaCollisionStats row;
            row.env_index = e;
            row.replica = static_cast<int>(g % cfg.replicas);
            run_lockstep(st, env, cfg.horizon, [&](std::int64_t t, std::int64_t) {
                ++row.count;
                row.last_time = t;
                if (t > res.late_from) ++row.late_count;
            });
            res.rows[static_cast<std::size_t>(g)] = row;
        }
    });

    std::vector<double> counts;
    counts.reserve(res.rows.size());
    std::int64_t late_hits = 0;
    for (const auto& r : res.rows) {
        counts.push_back(static_cast<double>(r.count));
        if (r.late_count > 0) ++late_hits;
    }
    res.pooled_median_count = stats::median(counts);
    res.late_fraction = static_cast<double>(late_hits) / static_cast<double>(total);
    for (int e = 0; e < cfg.environments; ++e) {
        std::vector<double> env_counts;
        env_counts.reserve(static_cast<std::size_t>(cfg.replicas));
        for (int r = 0; r < cfg.replicas; ++r)
            env_counts.push_back(static_cast<double>(
                res.rows[static_cast<std::size_t>(e) * cfg.replicas + r].count));
        res.per_env_median_count.push_back(stats::median(env_counts));
    }
    return res;
}

inline std::string collision_csv(const CollisionExperimentResult& res) {
    io::CsvWriter csv("collisions", {"env", "replica", "count", "last_time", "late_count"});
    for (const auto& r : res.rows)
        csv.row({io::fmt_i64(r.env_index), io::fmt_i64(r.replica), io::fmt_i64(r.count),
                 io::fmt_i64(r.last_time), io::fmt_i64(r.late_count)});
    return csv.str();
}

inline ordered_json collision_report(const CollisionExperimentResult& res,
                                     const ExperimentConfig& cfg) {
    ordered_json j = report_skeleton("collisions", cfg);
    if (res.parity_mixed)
        j["warning"] = "starts have mixed parity: simultaneous collisions are impossible";
    j["pooled_median_count"] = res.pooled_median_count;
    j["late_fraction"] = res.late_fraction;
    j["late_from"] = res.late_from;
    j["per_env_median_count"] = res.per_env_median_count;
    j["replica_rows"] = static_cast<std::int64_t>(res.rows.size());
    return j;
}

// ---------------------------------------------------------------------------
// regime comparison probe
// ---------------------------------------------------------------------------

struct RegimeComparisonResult {
    CollisionExperimentResult a, b;
    double ratio_smoothed = 0; // late-fraction ratio with (k+1/2)/(n+1) smoothing
    stats::RatioCI ci;
    std::int64_t late_a = 0, late_b = 0, n_a = 0, n_b = 0;
};

inline RegimeComparisonResult regime_compare(const ExperimentConfig& cfg_a,
                                             const ExperimentConfig& cfg_b) {
    if (cfg_a.horizon != cfg_b.horizon || cfg_a.replicas != cfg_b.replicas ||
        cfg_a.environments != cfg_b.environments)
        throw ConfigError("regime comparison needs matched budgets (horizon, replicas, "
                          "environments)");

    RegimeComparisonResult out;
    out.a = collision_experiment(cfg_a);
    out.b = collision_experiment(cfg_b);
    out.n_a = static_cast<std::int64_t>(out.a.rows.size());
    out.n_b = static_cast<std::int64_t>(out.b.rows.size());
    for (const auto& r : out.a.rows)
        if (r.late_count > 0) ++out.late_a;
    for (const auto& r : out.b.rows)
        if (r.late_count > 0) ++out.late_b;

    const double pa = (static_cast<double>(out.late_a) + 0.5) / (static_cast<double>(out.n_a) + 1.0);
    const double pb = (static_cast<double>(out.late_b) + 0.5) / (static_cast<double>(out.n_b) + 1.0);
    out.ratio_smoothed = pa / pb;
    const std::uint64_t boot_seed =
        rng::derive_key(cfg_a.master_seed, {rng::kSaltBootstrap, cfg_b.master_seed});
    out.ci = stats::bootstrap_proportion_ratio_ci(out.late_a, out.n_a, out.late_b, out.n_b, 2000,
                                                  boot_seed);
    return out;
}

inline std::string regime_csv(const RegimeComparisonResult& res) {
    io::CsvWriter csv("regime", {"side", "median_count", "late_fraction", "late_count", "replicas"});
    csv.row({"a", io::fmt_g17(res.a.pooled_median_count), io::fmt_g17(res.a.late_fraction),
             io::fmt_i64(res.late_a), io::fmt_i64(res.n_a)});
    csv.row({"b", io::fmt_g17(res.b.pooled_median_count), io::fmt_g17(res.b.late_fraction),
             io::fmt_i64(res.late_b), io::fmt_i64(res.n_b)});
    return csv.str();
}

inline ordered_json regime_report(const RegimeComparisonResult& res, const ExperimentConfig& cfg_a,
                                  const ExperimentConfig& cfg_b) {
    ordered_json j = report_skeleton("regime", cfg_a);
    j["config_b"] = config_to_json(cfg_b);
    j["median_count_a"] = res.a.pooled_median_count;
    j["median_count_b"] = res.b.pooled_median_count;
    j["late_fraction_a"] = res.a.late_fraction;
    j["late_fraction_b"] = res.b.late_fraction;
    j["late_fraction_ratio_smoothed"] = res.ratio_smoothed;
    j["ratio_ci95"] = ordered_json{res.ci.lo, res.ci.hi};
    return j;
}

// ---------------------------------------------------------------------------
// displacement exponent probe
// ---------------------------------------------------------------------------

struct ExponentFitResult {
    std::vector<std::int64_t> grid;
    std::vector<double> medians; // median displacement at each grid time
    stats::LinearFit fit;
    std::optional<double> kappa;  // from solve_kappa when the law admits one
    std::string kappa_error;      // error kind otherwise
    bool arithmetic_warning = false;
    std::optional<double> deviation; // |slope - kappa| when kappa exists
};

inline std::vector<std::int64_t> default_dyadic_grid(std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> grid;
    for (std::int64_t n = 1; n <= hi; n *= 2)
        if (n >= lo) grid.push_back(n);
    return grid;
}

// Median displacement over annealed replicas (a fresh environment per
// replica) against time on a log-log grid. Medians, not means: the annealed
// displacement has heavy tails at small kappa.
inline ExponentFitResult displacement_exponent(const ExperimentConfig& cfg) {
    std::vector<std::int64_t> grid =
        cfg.n_grid.empty() ? default_dyadic_grid(10'000, 1'000'000) : cfg.n_grid;
    if (grid.size() < 2) throw DegenerateFit("displacement fit needs at least 2 grid times");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    if (cfg.replicas < 1) throw ConfigError("displacement fit needs replicas >= 1");

    ExponentFitResult res;
    res.grid = grid;
    res.arithmetic_warning = cfg.law.arithmetic_support();
    try {
        res.kappa = solve_kappa(cfg.law).kappa;
    } catch (const Error& e) {
        res.kappa_error = e.kind();
    }

    const std::int64_t horizon = grid.back();
    const auto n_grid = grid.size();
    std::vector<double> displacement(static_cast<std::size_t>(cfg.replicas) * n_grid);

    parallel::parallel_for(0, cfg.replicas, cfg.threads, [&](std::int64_t r) {
        Environment env = Environment::sample(
            cfg.law, rng::environment_seed(cfg.master_seed, static_cast<std::uint64_t>(r)), -1024,
            1024);
        rng::Stream stream = rng::walker_stream(cfg.master_seed, static_cast<std::uint64_t>(r), 0);
        std::int64_t pos = cfg.x_start;
        std::size_t gi = 0;
        for (std::int64_t t = 0; t < horizon && gi < n_grid; ++t) {
            const double w = env.omega_extending(pos);
            pos += (stream.unit(static_cast<std::uint64_t>(t)) < w) ? 1 : -1;
            if (t + 1 == grid[gi]) {
                displacement[static_cast<std::size_t>(r) * n_grid + gi] =
                    static_cast<double>(pos - cfg.x_start);
                ++gi;
            }
        }
    });

    std::vector<double> log_n, log_median;
    for (std::size_t gi = 0; gi < n_grid; ++gi) {
        std::vector<double> column(static_cast<std::size_t>(cfg.replicas));
        for (int r = 0; r < cfg.replicas; ++r)
            column[static_cast<std::size_t>(r)] = displacement[static_cast<std::size_t>(r) * n_grid + gi];
        const double med = stats::median(column);
        res.medians.push_back(med);
        if (!(med > 0))
            throw DegenerateFit("median displacement nonpositive at n = " +
                                std::to_string(grid[gi]) + "; walk is not in the "
                                "transient-right regime at this horizon");
        log_n.push_back(std::log(static_cast<double>(grid[gi])));
        log_median.push_back(std::log(med));
    }
    res.fit = stats::ols_fit(log_n, log_median);
    if (res.kappa) res.deviation = std::abs(res.fit.slope - *res.kappa);
    return res;
}

inline std::string exponent_csv(const ExponentFitResult& res) {
    io::CsvWriter csv("exponent", {"n", "median_displacement", "log_n", "log_median"});
    for (std::size_t i = 0; i < res.grid.size(); ++i)
        csv.row({io::fmt_i64(res.grid[i]), io::fmt_g17(res.medians[i]),
                 io::fmt_g17(std::log(static_cast<double>(res.grid[i]))),
                 io::fmt_g17(std::log(res.medians[i]))});
    return csv.str();
}

inline ordered_json exponent_report(const ExponentFitResult& res, const ExperimentConfig& cfg) {
    ordered_json j = report_skeleton("exponent", cfg);
    if (res.arithmetic_warning)
        j["warning"] = "law has arithmetic log rho support; the displacement exponent "
                       "asymptotics assume a non-arithmetic law";
    j["slope"] = res.fit.slope;
    j["slope_se"] = res.fit.slope_se;
    j["slope_ci95"] = ordered_json{res.fit.ci_lo(), res.fit.ci_hi()};
    if (res.kappa) {
        j["kappa"] = *res.kappa;
        j["abs_deviation"] = *res.deviation;
    } else {
        j["kappa"] = nullptr;
        j["kappa_error"] = res.kappa_error;
    }
    return j;
}

// ---------------------------------------------------------------------------
// return-probability probe
// ---------------------------------------------------------------------------

// Locate b_i = e_{sigma(i)} by growing the analysis window until sigma(i)
// is inside it.
inline std::int64_t locate_b(Environment& env, const Schedule& sched, int i) {
    if (i < 1 || i > sched.i_max) throw ConfigError("i outside schedule range");
    std::int64_t x_max = 4096;
    for (;;) {
        LadderStructure lad = ladder_decomposition(env, x_max);
        sigma_and_b(lad, sched);
        if (lad.sigma_count() >= i) return lad.b[static_cast<std::size_t>(i)];
        if (x_max >= (std::int64_t{1} << 22))
            throw ScheduleOutOfReach("sigma(" + std::to_string(i) +
                                     ") not found within 2^22 sites");
        x_max *= 2;
    }
}

struct ReturnProbeRow {
    int env_index = 0;
    int i = 0;
    std::int64_t b = 0;
    std::uint64_t N = 0;
    std::int64_t grid_size = 0;
    double min_prob = 0;
    std::int64_t argmin_k = 0;
    double se = 0; // 0 in dp mode
};

inline constexpr std::int64_t kDpHorizonCap = std::int64_t{1} << 14;

// min over even k in [N_i/2, 2N_i] of P^{b_i}[S_k = b_i], exact (dp) or
// Monte Carlo (mc).
inline std::vector<ReturnProbeRow> return_probability_probe(Environment& env,
                                                            const Schedule& sched,
                                                            const std::vector<int>& i_list,
                                                            const std::string& mode,
                                                            int env_index, int replicas,
                                                            std::uint64_t master_seed,
                                                            int threads) {
    if (mode != "dp" && mode != "mc") throw ConfigError("mode must be dp or mc");
    std::vector<ReturnProbeRow> rows;
    for (int i : i_list) {
        const std::uint64_t N = sched.exact(i); // throws ScheduleOutOfReach beyond cap
        const auto n_i = static_cast<std::int64_t>(N);
        const std::int64_t b = locate_b(env, sched, i);

        // even k in [N_i/2, 2N_i), as in the return-probability bound
        std::vector<std::int64_t> grid;
        for (std::int64_t k = (n_i + 1) / 2; k < 2 * n_i; ++k)
            if (k % 2 == 0) grid.push_back(k);
        if (grid.empty())
            throw ScheduleOutOfReach("empty even grid for i = " + std::to_string(i));

        ReturnProbeRow row;
        row.env_index = env_index;
        row.i = i;
        row.b = b;
        row.N = N;
        row.grid_size = static_cast<std::int64_t>(grid.size());

        if (mode == "dp") {
            if (2 * n_i > kDpHorizonCap)
                throw ScheduleOutOfReach("dp mode caps the horizon at 2^14 steps; "
                                         "use mc mode for i = " + std::to_string(i));
            const std::int64_t hw = 2 * n_i + 2;
            env.ensure(b - hw, b + hw);
            const Environment& cenv = env;
            // one DP sweep to 2N, reading the return mass at each grid k
            const std::int64_t lo = b - hw;
            const auto len = static_cast<std::size_t>(2 * hw + 1);
            std::vector<long double> cur(len, 0.0L), next(len, 0.0L);
            cur[static_cast<std::size_t>(b - lo)] = 1.0L;
            double best = 2.0;
            std::int64_t best_k = -1;
            std::size_t gi = 0;
            for (std::int64_t t = 1; t <= 2 * n_i && gi < grid.size(); ++t) {
                std::fill(next.begin(), next.end(), 0.0L);
                for (std::size_t j = 0; j < len; ++j) {
                    const long double mass = cur[j];
                    if (mass == 0.0L) continue;
                    const std::int64_t x = lo + static_cast<std::int64_t>(j);
                    const long double pu = static_cast<long double>(cenv.omega(x));
                    next[j + 1] += mass * pu; // hw margin: boundary never reached
                    next[j - 1] += mass * (1.0L - pu);
                }
                cur.swap(next);
                if (t == grid[gi]) {
                    const double v = static_cast<double>(cur[static_cast<std::size_t>(b - lo)]);
                    if (v < best) {
                        best = v;
                        best_k = t;
                    }
                    ++gi;
                }
            }
            row.min_prob = best;
            row.argmin_k = best_k;
            row.se = 0;
        } else {
            if (replicas < 1) throw ConfigError("mc mode needs replicas >= 1");
            std::vector<std::int64_t> hits(grid.size(), 0);
            std::vector<std::vector<std::int64_t>> per_replica(
                static_cast<std::size_t>(replicas));
            parallel::parallel_for(0, replicas, threads, [&](std::int64_t r) {
                Environment local = env;
                rng::Stream stream = rng::walker_stream(
                    master_seed,
                    static_cast<std::uint64_t>(env_index) * static_cast<std::uint64_t>(replicas) +
                        static_cast<std::uint64_t>(r),
                    0);
                std::vector<std::int64_t> mine(grid.size(), 0);
                std::int64_t pos = b;
                std::size_t gi = 0;
                for (std::int64_t t = 0; t < 2 * n_i && gi < grid.size(); ++t) {
                    const double w = local.omega_extending(pos);
                    pos += (stream.unit(static_cast<std::uint64_t>(t)) < w) ? 1 : -1;
                    if (t + 1 == grid[gi]) {
                        if (pos == b) mine[gi] = 1;
                        ++gi;
                    }
                }
                per_replica[static_cast<std::size_t>(r)] = std::move(mine);
            });
            for (const auto& mine : per_replica)
                for (std::size_t g = 0; g < grid.size(); ++g) hits[g] += mine[g];
            double best = 2.0;
            std::int64_t best_k = -1;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double est = static_cast<double>(hits[g]) / replicas;
                if (est < best) {
                    best = est;
                    best_k = grid[g];
                }
            }
            row.min_prob = best;
            row.argmin_k = best_k;
            row.se = std::sqrt(best * (1.0 - best) / replicas);
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::string return_probe_csv(const std::vector<ReturnProbeRow>& rows) {
    io::CsvWriter csv("return-probe",
                      {"env", "i", "b_i", "N_i", "grid_size", "min_prob", "argmin_k", "se"});
    for (const auto& r : rows)
        csv.row({io::fmt_i64(r.env_index), io::fmt_i64(r.i), io::fmt_i64(r.b),
                 io::fmt_i64(static_cast<std::int64_t>(r.N)), io::fmt_i64(r.grid_size),
                 io::fmt_g17(r.min_prob), io::fmt_i64(r.argmin_k), io::fmt_g17(r.se)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// hitting-time probe
// ---------------------------------------------------------------------------

struct HittingProbeRow {
    int env_index = 0;
    int i = 0;
    std::int64_t b = 0;
    std::uint64_t N = 0;
    std::int64_t cap = 0; // N_i / 10
    double estimate = 0;  // P^x[tau(b_i) <= N_i/10]
    double se = 0;
    int replicas = 0;
};

inline HittingProbeRow hitting_probe(Environment& env, const Schedule& sched, int i,
                                     std::int64_t x, int replicas, std::uint64_t master_seed,
                                     int env_index, int threads) {
    if (replicas < 1) throw ConfigError("hitting probe needs replicas >= 1");
    HittingProbeRow row;
    row.env_index = env_index;
    row.i = i;
    row.N = sched.exact(i);
    row.b = locate_b(env, sched, i);
    row.cap = static_cast<std::int64_t>(row.N) / 10;
    row.replicas = replicas;

    std::vector<std::uint8_t> reached(static_cast<std::size_t>(replicas), 0);
    parallel::parallel_for(0, replicas, threads, [&](std::int64_t r) {
        Environment local = env;
        rng::Stream stream = rng::walker_stream(
            master_seed,
            static_cast<std::uint64_t>(env_index) * static_cast<std::uint64_t>(replicas) +
                static_cast<std::uint64_t>(r),
            0);
        reached[static_cast<std::size_t>(r)] =
            hitting_time(local, x, row.b, row.cap, stream).has_value() ? 1 : 0;
    });
    std::int64_t hits = 0;
    for (auto v : reached) hits += v;
    row.estimate = static_cast<double>(hits) / replicas;
    row.se = std::sqrt(row.estimate * (1.0 - row.estimate) / replicas);
    return row;
}

inline std::string hitting_probe_csv(const std::vector<HittingProbeRow>& rows) {
    io::CsvWriter csv("hitting-probe",
                      {"env", "i", "b_i", "N_i", "cap", "estimate", "se", "replicas"});
    for (const auto& r : rows)
        csv.row({io::fmt_i64(r.env_index), io::fmt_i64(r.i), io::fmt_i64(r.b),
                 io::fmt_i64(static_cast<std::int64_t>(r.N)), io::fmt_i64(r.cap),
                 io::fmt_g17(r.estimate), io::fmt_g17(r.se), io::fmt_i64(r.replicas)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// multi-SRW decay probe
// ---------------------------------------------------------------------------

struct SrwDecayResult {
    std::vector<std::int64_t> grid;
    std::vector<double> probs;
    stats::LinearFit fit;
};

// DP-exact P[S_n^(1..d) = Z_n^(1..p) all equal] on a dyadic grid, fitted in
// the log-log plane. d = 0 runs the pure-SRW control.
inline SrwDecayResult multi_srw_decay(const ExperimentConfig& cfg) {
    if (cfg.p < 3) throw ConfigError("srw-decay probe requires p >= 3 simple random walks");
    if (cfg.d < 0) throw ConfigError("d must be nonnegative");
    std::vector<std::int64_t> grid = cfg.n_grid.empty() ? default_dyadic_grid(64, 4096) : cfg.n_grid;
    if (grid.size() < 2) throw DegenerateFit("decay fit needs at least 2 grid times");

    const auto starts = resolved_starts(cfg);
    if (parity_mixed(starts))
        throw ConfigError("srw-decay probe needs same-parity starts (mixed parity makes every "
                          "probability zero)");
    const std::vector<std::int64_t> s_starts(starts.begin(), starts.begin() + cfg.d);
    const std::vector<std::int64_t> z_starts(starts.begin() + cfg.d, starts.end());

    Environment env =
        Environment::sample(cfg.law, rng::environment_seed(cfg.master_seed, 0), -1024, 1024);

    SrwDecayResult res;
    res.grid = grid;
    res.probs.resize(grid.size());
    parallel::parallel_for(0, static_cast<std::int64_t>(grid.size()), cfg.threads,
                           [&](std::int64_t gi) {
                               Environment local = env;
                               res.probs[static_cast<std::size_t>(gi)] = oracle::exact_collision_prob(
                                   local, s_starts, z_starts, grid[static_cast<std::size_t>(gi)]);
                           });

    std::vector<double> log_n, log_p;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!(res.probs[g] > 0))
            throw DegenerateFit("collision probability vanishes at n = " +
                                std::to_string(res.grid[g]) +
                                " (check start parities against the grid)");
        log_n.push_back(std::log(static_cast<double>(res.grid[g])));
        log_p.push_back(std::log(res.probs[g]));
    }
    res.fit = stats::ols_fit(log_n, log_p);
    return res;
}

inline std::string srw_decay_csv(const SrwDecayResult& res) {
    io::CsvWriter csv("srw-decay", {"n", "prob"});
    for (std::size_t i = 0; i < res.grid.size(); ++i)
        csv.row({io::fmt_i64(res.grid[i]), io::fmt_g17(res.probs[i])});
    return csv.str();
}

inline ordered_json srw_decay_report(const SrwDecayResult& res, const ExperimentConfig& cfg) {
    ordered_json j = report_skeleton("srw-decay", cfg);
    j["slope"] = res.fit.slope;
    j["slope_se"] = res.fit.slope_se;
    j["slope_ci95"] = ordered_json{res.fit.ci_lo(), res.fit.ci_hi()};
    return j;
}

// ---------------------------------------------------------------------------
// law-of-iterated-logarithm envelope probe
// ---------------------------------------------------------------------------

struct LilResult {
    std::vector<std::int64_t> grid;
    std::vector<std::int64_t> violations; // per grid time, across replicas
    int replicas = 0;
    double constant = 2.0;
    double rate = 0; // total violations / (replicas * grid size)
};

// Fraction of sampled (replica, n) pairs with |Z_n| > c * sqrt(2 n loglog n).
inline LilResult lil_envelope_check(const ExperimentConfig& cfg) {
    std::vector<std::int64_t> grid =
        cfg.n_grid.empty() ? default_dyadic_grid(1024, 1'000'000) : cfg.n_grid;
    for (std::int64_t n : grid)
        if (n < 3)
            throw RangeError("lil probe needs n >= 3 (log log n must be positive)");
    if (cfg.replicas < 1) throw ConfigError("lil probe needs replicas >= 1");

    LilResult res;
    res.grid = grid;
    res.replicas = cfg.replicas;
    res.constant = cfg.envelope_constant;
    res.violations.assign(grid.size(), 0);

    const std::int64_t horizon = grid.back();
    std::vector<std::vector<std::uint8_t>> flags(static_cast<std::size_t>(cfg.replicas));
    parallel::parallel_for(0, cfg.replicas, cfg.threads, [&](std::int64_t r) {
        rng::Stream stream = rng::walker_stream(cfg.master_seed, static_cast<std::uint64_t>(r), 0);
        std::vector<std::uint8_t> mine(grid.size(), 0);
        std::int64_t pos = 0;
        std::size_t gi = 0;
        for (std::int64_t t = 0; t < horizon && gi < grid.size(); ++t) {
            pos += (stream.unit(static_cast<std::uint64_t>(t)) < 0.5) ? 1 : -1;
            if (t + 1 == grid[gi]) {
                const double n = static_cast<double>(t + 1);
                const double envelope =
                    res.constant * std::sqrt(2.0 * n * std::log(std::log(n)));
                if (std::abs(static_cast<double>(pos)) > envelope) mine[gi] = 1;
                ++gi;
            }
        }
        flags[static_cast<std::size_t>(r)] = std::move(mine);
    });
    std::int64_t total = 0;
    for (const auto& mine : flags)
        for (std::size_t g = 0; g < grid.size(); ++g) {
            res.violations[g] += mine[g];
            total += mine[g];
        }
    res.rate = static_cast<double>(total) /
               (static_cast<double>(cfg.replicas) * static_cast<double>(grid.size()));
    return res;
}

inline std::string lil_csv(const LilResult& res) {
    io::CsvWriter csv("lil", {"n", "violations", "replicas"});
    for (std::size_t i = 0; i < res.grid.size(); ++i)
        csv.row({io::fmt_i64(res.grid[i]), io::fmt_i64(res.violations[i]),
                 io::fmt_i64(res.replicas)});
    return csv.str();
}

inline ordered_json lil_report(const LilResult& res, const ExperimentConfig& cfg) {
    ordered_json j = report_skeleton("lil", cfg);
    j["envelope_constant"] = res.constant;
    j["violation_rate"] = res.rate;
    return j;
}

} // namespace rwre
