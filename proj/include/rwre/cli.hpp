#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rwre/config.hpp"
#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/experiments.hpp"
#include "rwre/io.hpp"
#include "rwre/landscape.hpp"
#include "rwre/oracle.hpp"
#include "rwre/walkers.hpp"

// Single entry point: solve-kappa, gen-env, analyze-potential, simulate,
// dp-exact, collision-exact, experiment. All randomness flows from --seed;
// identical invocations produce byte-identical outputs. Exit codes: 0 ok,
// 2 config errors, 3 schedule out of reach, 1 internal failures.

namespace rwre::cli {

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << content;
    else
        io::write_file(out_path, content);
}

inline std::vector<std::int64_t> parse_int_list(const std::string& text,
                                                const std::string& what) {
    std::vector<std::int64_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find(',', start);
        const std::string part =
            end == std::string::npos ? text.substr(start) : text.substr(start, end - start);
        if (!part.empty()) {
            try {
                std::size_t used = 0;
                out.push_back(std::stoll(part, &used));
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ConfigError("cannot parse integer '" + part + "' in " + what);
            }
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

// ---- subcommand bodies ----------------------------------------------------

inline void cmd_solve_kappa(const std::string& law_desc, std::ostream& out) {
    const EnvironmentLaw law = config::law_from_descriptor(law_desc);
    const KappaResult k = solve_kappa(law);
    out << "kappa=" << io::fmt_g17(k.kappa) << "\n";
    out << "residual=" << io::fmt_g17(k.residual) << "\n";
    out << "mean_log_rho=" << io::fmt_g17(k.mean_log_rho) << "\n";
}

inline void cmd_gen_env(const std::string& law_desc, std::uint64_t seed, std::int64_t lo,
                        std::int64_t hi, const std::string& out_path, std::ostream& out) {
    const EnvironmentLaw law = config::law_from_descriptor(law_desc);
    Environment env = Environment::sample(law, seed, lo, hi);
    io::CsvWriter csv("gen-env", {"x", "omega", "V"});
    for (std::int64_t x = lo; x <= hi; ++x)
        csv.row({io::fmt_i64(x), io::fmt_g17(env.omega(x)), io::fmt_g17(env.potential_at(x))});
    emit(csv.str(), out_path, out);
}

inline void cmd_analyze_potential(const std::string& law_desc, std::uint64_t seed,
                                  std::int64_t x_max, std::optional<double> kappa,
                                  std::optional<double> epsilon, double c0, int i_max,
                                  std::uint64_t horizon_cap, const std::string& out_path,
                                  std::ostream& out) {
    const EnvironmentLaw law = config::law_from_descriptor(law_desc);
    const double kap = kappa ? *kappa : solve_kappa(law).kappa;
    const Schedule sched = make_schedule(kap, epsilon, c0, i_max, horizon_cap);
    Environment env = Environment::sample(law, seed, -16, std::max<std::int64_t>(x_max, 16));
    LadderStructure lad = ladder_decomposition(env, x_max);
    sigma_and_b(lad, sched);
    const std::vector<BBoundRow> bounds = check_b_bound(lad, sched, kap);

    io::CsvWriter csv("analyze-potential",
                      {"i", "e_i", "V_e_i", "H_i", "sigma_i", "b_i", "f_i", "log_N_i",
                       "b_bound_ok"});
    const auto epochs = static_cast<std::int64_t>(lad.e.size());
    for (std::int64_t i = 0; i < epochs; ++i) {
        std::vector<std::string> cells(9, "");
        cells[0] = io::fmt_i64(i);
        cells[1] = io::fmt_i64(lad.e[static_cast<std::size_t>(i)]);
        cells[2] = io::fmt_g17(env.potential(lad.e[static_cast<std::size_t>(i)]));
        if (i < static_cast<std::int64_t>(lad.H.size()))
            cells[3] = io::fmt_g17(lad.H[static_cast<std::size_t>(i)]);
        if (i >= 1 && i <= lad.sigma_count()) {
            cells[4] = io::fmt_i64(lad.sigma[static_cast<std::size_t>(i)]);
            cells[5] = io::fmt_i64(lad.b[static_cast<std::size_t>(i)]);
        }
        if (i >= 1 && i <= sched.i_max) {
            cells[6] = io::fmt_g17(sched.f[static_cast<std::size_t>(i)]);
            cells[7] = io::fmt_g17(sched.log_N[static_cast<std::size_t>(i)]);
        }
        if (i >= 1 && i <= static_cast<std::int64_t>(bounds.size()))
            cells[8] = bounds[static_cast<std::size_t>(i - 1)].ok ? "1" : "0";
        csv.row(cells);
    }
    emit(csv.str(), out_path, out);
}

inline void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_path,
                         std::ostream& out) {
    if (cfg.d + cfg.p < 2) throw ConfigError("simulate needs d+p >= 2 tracked walkers");
    const auto starts = resolved_starts(cfg);
    const std::vector<std::int64_t> s_starts(starts.begin(), starts.begin() + cfg.d);
    const std::vector<std::int64_t> z_starts(starts.begin() + cfg.d, starts.end());

    std::vector<CollisionRecord> records(static_cast<std::size_t>(cfg.replicas));
    parallel::parallel_for(0, cfg.replicas, cfg.threads, [&](std::int64_t r) {
        Environment env =
            Environment::sample(cfg.law, rng::environment_seed(cfg.master_seed, 0), -1024, 1024);
        EnsembleState st =
            init_ensemble(s_starts, z_starts, cfg.master_seed, static_cast<std::uint64_t>(r));
        records[static_cast<std::size_t>(r)] = run_collisions(st, env, cfg.horizon);
    });

    io::CsvWriter csv("simulate", {"replica", "time", "location"});
    for (int r = 0; r < cfg.replicas; ++r) {
        const CollisionRecord& rec = records[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < rec.times.size(); ++i)
            csv.row({io::fmt_i64(r), io::fmt_i64(rec.times[i]), io::fmt_i64(rec.locations[i])});
    }
    emit(csv.str(), out_path, out);
}

inline void cmd_dp_exact(const std::string& law_desc, bool srw, std::uint64_t seed,
                         std::int64_t start, const std::vector<std::int64_t>& n_list,
                         std::int64_t halfwidth, bool strict, const std::string& out_path,
                         std::ostream& out) {
    std::optional<Environment> env;
    if (!srw) {
        if (law_desc.empty()) throw ConfigError("dp-exact needs --law or --srw");
        env = Environment::sample(config::law_from_descriptor(law_desc), seed, -16, 16);
    }
    io::CsvWriter csv("dp-exact", {"n", "k", "prob", "leak"});
    for (std::int64_t n : n_list) {
        const std::optional<std::int64_t> hw =
            halfwidth > 0 ? std::optional<std::int64_t>(halfwidth) : std::nullopt;
        const oracle::ExactMarginal m = srw ? oracle::srw_marginal(start, n, hw)
                                            : oracle::exact_marginal(*env, start, n, hw, strict);
        // emit the reachable parity class within [start-n, start+n]
        for (std::int64_t k = std::max(m.support_lo, start - n);
             k <= std::min(m.support_hi(), start + n); ++k) {
            if (((k - start + n) % 2 + 2) % 2 != 0) continue;
            csv.row({io::fmt_i64(n), io::fmt_i64(k), io::fmt_g17(m.prob_at(k)),
                     io::fmt_g17(m.leak)});
        }
    }
    emit(csv.str(), out_path, out);
}

inline void cmd_collision_exact(const std::string& law_desc, std::uint64_t seed,
                                const std::vector<std::int64_t>& s_starts,
                                const std::vector<std::int64_t>& z_starts,
                                const std::vector<std::int64_t>& n_list,
                                const std::string& out_path, std::ostream& out) {
    Environment env = Environment::sample(config::law_from_descriptor(law_desc), seed, -16, 16);
    io::CsvWriter csv("collision-exact", {"n", "prob"});
    for (std::int64_t n : n_list)
        csv.row({io::fmt_i64(n),
                 io::fmt_g17(oracle::exact_collision_prob(env, s_starts, z_starts, n))});
    emit(csv.str(), out_path, out);
}

// ---- experiment dispatch ---------------------------------------------------

inline void write_report(const ordered_json& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    io::write_file(out_dir + "/report.json", report.dump(2) + "\n");
}

inline void run_experiment(const std::string& probe, ExperimentConfig cfg,
                           std::optional<EnvironmentLaw> law_b, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (probe == "collisions") {
        const CollisionExperimentResult res = collision_experiment(cfg);
        io::write_file(out_dir + "/collisions.csv", collision_csv(res));
        write_report(collision_report(res, cfg), out_dir);
    } else if (probe == "regime") {
        if (!law_b) throw ConfigError("regime probe needs [regime] law_b in the config file");
        ExperimentConfig cfg_b = cfg;
        cfg_b.law = *law_b;
        const RegimeComparisonResult res = regime_compare(cfg, cfg_b);
        io::write_file(out_dir + "/regime.csv", regime_csv(res));
        io::write_file(out_dir + "/collisions_a.csv", collision_csv(res.a));
        io::write_file(out_dir + "/collisions_b.csv", collision_csv(res.b));
        write_report(regime_report(res, cfg, cfg_b), out_dir);
    } else if (probe == "exponent") {
        const ExponentFitResult res = displacement_exponent(cfg);
        io::write_file(out_dir + "/exponent.csv", exponent_csv(res));
        write_report(exponent_report(res, cfg), out_dir);
    } else if (probe == "return" || probe == "hitting") {
        const Schedule sched = schedule_for(cfg);
        std::vector<int> i_list = cfg.i_list.empty() ? std::vector<int>{1, 2} : cfg.i_list;
        ordered_json report = report_skeleton(probe, cfg);
        if (probe == "return") {
            std::vector<ReturnProbeRow> rows;
            for (int e = 0; e < cfg.environments; ++e) {
                Environment env = Environment::sample(
                    cfg.law, rng::environment_seed(cfg.master_seed, static_cast<std::uint64_t>(e)),
                    -1024, 1024);
                auto part = return_probability_probe(env, sched, i_list, cfg.mode, e,
                                                     cfg.replicas, cfg.master_seed, cfg.threads);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            io::write_file(out_dir + "/return-probe.csv", return_probe_csv(rows));
            ordered_json mins = ordered_json::array();
            for (const auto& r : rows) mins.push_back(r.min_prob);
            report["min_prob"] = mins;
        } else {
            std::vector<HittingProbeRow> rows;
            for (int e = 0; e < cfg.environments; ++e) {
                Environment env = Environment::sample(
                    cfg.law, rng::environment_seed(cfg.master_seed, static_cast<std::uint64_t>(e)),
                    -1024, 1024);
                for (int i : i_list)
                    rows.push_back(hitting_probe(env, sched, i, cfg.x_start, cfg.replicas,
                                                 cfg.master_seed, e, cfg.threads));
            }
            io::write_file(out_dir + "/hitting-probe.csv", hitting_probe_csv(rows));
            ordered_json ests = ordered_json::array();
            for (const auto& r : rows) ests.push_back(r.estimate);
            report["estimates"] = ests;
        }
        write_report(report, out_dir);
    } else if (probe == "srw-decay") {
        const SrwDecayResult res = multi_srw_decay(cfg);
        io::write_file(out_dir + "/srw-decay.csv", srw_decay_csv(res));
        write_report(srw_decay_report(res, cfg), out_dir);
    } else if (probe == "lil") {
        const LilResult res = lil_envelope_check(cfg);
        io::write_file(out_dir + "/lil.csv", lil_csv(res));
        write_report(lil_report(res, cfg), out_dir);
    } else {
        throw ConfigError("unknown probe '" + probe + "'");
    }
}

// ---- top-level -------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"collision laboratory for random walks in random environment"};
    app.require_subcommand(1);

    try {
        // solve-kappa
        auto* sk = app.add_subcommand("solve-kappa", "solve lambda(kappa) = 1 for a law");
        auto sk_law = std::make_shared<std::string>();
        sk->add_option("--law", *sk_law, "law descriptor, e.g. two_point:0.75@0.75,0.25@0.25")
            ->required();
        sk->callback([&out, sk_law] { cmd_solve_kappa(*sk_law, out); });

        // gen-env
        auto* ge = app.add_subcommand("gen-env", "sample an environment window as CSV");
        auto ge_law = std::make_shared<std::string>();
        auto ge_seed = std::make_shared<std::uint64_t>(1);
        auto ge_lo = std::make_shared<std::int64_t>(-16);
        auto ge_hi = std::make_shared<std::int64_t>(16);
        auto ge_out = std::make_shared<std::string>();
        ge->add_option("--law", *ge_law)->required();
        ge->add_option("--seed", *ge_seed);
        ge->add_option("--lo", *ge_lo);
        ge->add_option("--hi", *ge_hi);
        ge->add_option("--out", *ge_out);
        ge->callback(
            [&out, ge_law, ge_seed, ge_lo, ge_hi, ge_out] {
                cmd_gen_env(*ge_law, *ge_seed, *ge_lo, *ge_hi, *ge_out, out);
            });

        // analyze-potential
        auto* ap = app.add_subcommand("analyze-potential",
                                      "ladder epochs, excursion heights, sigma/b and schedule");
        auto ap_law = std::make_shared<std::string>();
        auto ap_seed = std::make_shared<std::uint64_t>(1);
        auto ap_xmax = std::make_shared<std::int64_t>(10000);
        auto ap_kappa = std::make_shared<double>(-1);
        auto ap_eps = std::make_shared<double>(-1);
        auto ap_c0 = std::make_shared<double>(2.0);
        auto ap_imax = std::make_shared<int>(16);
        auto ap_cap = std::make_shared<std::uint64_t>(1'000'000);
        auto ap_out = std::make_shared<std::string>();
        ap->add_option("--law", *ap_law)->required();
        ap->add_option("--seed", *ap_seed);
        ap->add_option("--x-max", *ap_xmax);
        ap->add_option("--kappa", *ap_kappa, "override kappa (default: solved from the law)");
        ap->add_option("--epsilon", *ap_eps, "schedule epsilon (default: midpoint of range)");
        ap->add_option("--C0", *ap_c0);
        ap->add_option("--i-max", *ap_imax);
        ap->add_option("--horizon-cap", *ap_cap);
        ap->add_option("--out", *ap_out);
        ap->callback([&out, ap_law, ap_seed, ap_xmax, ap_kappa, ap_eps, ap_c0, ap_imax, ap_cap,
                      ap_out] {
            cmd_analyze_potential(*ap_law, *ap_seed, *ap_xmax,
                                  *ap_kappa > 0 ? std::optional<double>(*ap_kappa) : std::nullopt,
                                  *ap_eps > 0 ? std::optional<double>(*ap_eps) : std::nullopt,
                                  *ap_c0, *ap_imax, *ap_cap, *ap_out, out);
        });

        // simulate
        auto* sim = app.add_subcommand("simulate", "lockstep walkers, one CSV row per collision");
        auto sim_cfg = std::make_shared<ExperimentConfig>();
        auto sim_law = std::make_shared<std::string>();
        auto sim_starts = std::make_shared<std::string>();
        auto sim_out = std::make_shared<std::string>();
        sim->add_option("--law", *sim_law)->required();
        sim->add_option("--d", sim_cfg->d);
        sim->add_option("--p", sim_cfg->p);
        sim->add_option("--starts", *sim_starts, "comma-separated, d RWRE starts then p SRW starts");
        sim->add_option("--horizon", sim_cfg->horizon);
        sim->add_option("--replicas", sim_cfg->replicas);
        sim->add_option("--seed", sim_cfg->master_seed);
        sim->add_option("--threads", sim_cfg->threads);
        sim->add_option("--out", *sim_out);
        sim->callback([&out, sim_cfg, sim_law, sim_starts, sim_out] {
            ExperimentConfig cfg = *sim_cfg;
            cfg.law = config::law_from_descriptor(*sim_law);
            if (!sim_starts->empty()) cfg.starts = parse_int_list(*sim_starts, "--starts");
            cmd_simulate(cfg, *sim_out, out);
        });

        // dp-exact
        auto* dp = app.add_subcommand("dp-exact", "exact quenched marginal by forward DP");
        auto dp_law = std::make_shared<std::string>();
        auto dp_srw = std::make_shared<bool>(false);
        auto dp_seed = std::make_shared<std::uint64_t>(1);
        auto dp_start = std::make_shared<std::int64_t>(0);
        auto dp_n = std::make_shared<std::string>("16");
        auto dp_hw = std::make_shared<std::int64_t>(0);
        auto dp_strict = std::make_shared<bool>(false);
        auto dp_out = std::make_shared<std::string>();
        dp->add_option("--law", *dp_law);
        dp->add_flag("--srw", *dp_srw, "use the simple-random-walk kernel");
        dp->add_option("--seed", *dp_seed);
        dp->add_option("--start", *dp_start);
        dp->add_option("--n", *dp_n, "comma-separated times");
        dp->add_option("--halfwidth", *dp_hw, "window halfwidth; 0 = exact (n+1)");
        dp->add_flag("--strict", *dp_strict, "fail when leak exceeds 1e-9");
        dp->add_option("--out", *dp_out);
        dp->callback([&out, dp_law, dp_srw, dp_seed, dp_start, dp_n, dp_hw, dp_strict, dp_out] {
            cmd_dp_exact(*dp_law, *dp_srw, *dp_seed, *dp_start, parse_int_list(*dp_n, "--n"),
                         *dp_hw, *dp_strict, *dp_out, out);
        });

        // collision-exact
        auto* ce = app.add_subcommand("collision-exact",
                                      "exact simultaneous-collision probability at fixed times");
        auto ce_law = std::make_shared<std::string>();
        auto ce_seed = std::make_shared<std::uint64_t>(1);
        auto ce_s = std::make_shared<std::string>("0");
        auto ce_z = std::make_shared<std::string>("0");
        auto ce_n = std::make_shared<std::string>("16");
        auto ce_out = std::make_shared<std::string>();
        ce->add_option("--law", *ce_law)->required();
        ce->add_option("--seed", *ce_seed);
        ce->add_option("--s-starts", *ce_s, "comma-separated RWRE starts (empty for none)");
        ce->add_option("--z-starts", *ce_z, "comma-separated SRW starts");
        ce->add_option("--n", *ce_n, "comma-separated times");
        ce->add_option("--out", *ce_out);
        ce->callback([&out, ce_law, ce_seed, ce_s, ce_z, ce_n, ce_out] {
            cmd_collision_exact(*ce_law, *ce_seed, parse_int_list(*ce_s, "--s-starts"),
                                parse_int_list(*ce_z, "--z-starts"),
                                parse_int_list(*ce_n, "--n"), *ce_out, out);
        });

        // experiment
        auto* ex = app.add_subcommand("experiment", "run a statistical probe from a config file");
        auto ex_probe = std::make_shared<std::string>();
        auto ex_config = std::make_shared<std::string>();
        auto ex_out = std::make_shared<std::string>("out");
        auto ex_seed = std::make_shared<std::int64_t>(-1);
        auto ex_threads = std::make_shared<int>(0);
        auto ex_replicas = std::make_shared<int>(0);
        auto ex_horizon = std::make_shared<std::int64_t>(0);
        auto ex_envs = std::make_shared<int>(0);
        ex->add_option("--probe", *ex_probe,
                       "one of collisions|regime|exponent|return|hitting|srw-decay|lil")
            ->required();
        ex->add_option("--config", *ex_config, "TOML-style run config")->required();
        ex->add_option("--out", *ex_out, "output directory");
        ex->add_option("--seed", *ex_seed, "override config seed");
        ex->add_option("--threads", *ex_threads, "override worker count");
        ex->add_option("--replicas", *ex_replicas);
        ex->add_option("--horizon", *ex_horizon);
        ex->add_option("--environments", *ex_envs);
        ex->callback([ex_probe, ex_config, ex_out, ex_seed, ex_threads, ex_replicas, ex_horizon,
                      ex_envs] {
            config::LoadedConfig loaded = config::load_config_file(*ex_config);
            if (*ex_seed >= 0) loaded.exp.master_seed = static_cast<std::uint64_t>(*ex_seed);
            if (*ex_threads > 0) loaded.exp.threads = *ex_threads;
            if (*ex_replicas > 0) loaded.exp.replicas = *ex_replicas;
            if (*ex_horizon > 0) loaded.exp.horizon = *ex_horizon;
            if (*ex_envs > 0) loaded.exp.environments = *ex_envs;
            run_experiment(*ex_probe, loaded.exp, loaded.law_b, *ex_out);
        });

        std::vector<const char*> argv;
        argv.push_back("rwre-lab");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
        return 0;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        ordered_json j;
        j["error"] = ordered_json{{"kind", "UsageError"}, {"message", e.what()}};
        err << j.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        ordered_json j;
        j["error"] = ordered_json{{"kind", e.kind()}, {"message", e.what()}};
        err << j.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"] = ordered_json{{"kind", "InternalError"}, {"message", e.what()}};
        err << j.dump() << "\n";
        return 1;
    }
}

} // namespace rwre::cli
