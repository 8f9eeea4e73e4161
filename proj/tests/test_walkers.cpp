#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/oracle.hpp"
#include "rwre/walkers.hpp"

using namespace rwre;

TEST_SUITE_BEGIN("walkers");

TEST_CASE("init_ensemble is deterministic and separates replicas") {
    EnsembleState a = init_ensemble({0}, {0}, 1, 0);
    EnsembleState b = init_ensemble({0}, {0}, 1, 0);
    CHECK(a.s_stream[0].key == b.s_stream[0].key);
    CHECK(a.z_stream[0].key == b.z_stream[0].key);

    EnsembleState c = init_ensemble({0}, {0}, 1, 1);
    std::vector<std::uint64_t> words_a, words_c;
    for (std::uint64_t i = 0; i < 64; ++i) {
        words_a.push_back(a.s_stream[0].word(i));
        words_c.push_back(c.s_stream[0].word(i));
    }
    CHECK(words_a != words_c);

    EnsembleState d = init_ensemble({0, 2}, {4}, 9, 0);
    CHECK(d.d() == 2);
    CHECK(d.p() == 1);
    CHECK(d.s_pos == std::vector<std::int64_t>{0, 2});
    CHECK(d.z_pos == std::vector<std::int64_t>{4});
    CHECK(d.time == 0);
}

TEST_CASE("step follows the kernel branch") {
    Environment env = Environment::from_omega(-8, std::vector<double>(17, 0.7));
    EnsembleState st = init_ensemble({0}, {}, 5, 3);
    const double u = st.s_stream[0].unit(0);
    step(st, env);
    CHECK(st.time == 1);
    CHECK(st.s_pos[0] == ((u < 0.7) ? 1 : -1));
}

TEST_CASE("up-step frequency matches omega at the ellipticity edge") {
    Environment env = Environment::from_omega(-4, std::vector<double>(9, 0.95));
    // single walker bouncing in an extendable homogeneous environment
    Environment wide =
        Environment::sample(make_two_point_law({{0.95, 1.0}}), 0, -16, 16);
    EnsembleState st = init_ensemble({0}, {}, 11, 0);
    const std::int64_t n = 1'000'000;
    std::int64_t ups = 0;
    for (std::int64_t t = 0; t < n; ++t) {
        const std::int64_t before = st.s_pos[0];
        step(st, wide);
        ups += (st.s_pos[0] > before) ? 1 : 0;
    }
    const double freq = static_cast<double>(ups) / static_cast<double>(n);
    const double se = std::sqrt(0.95 * 0.05 / static_cast<double>(n));
    CHECK(std::abs(freq - 0.95) <= 3 * se);
}

TEST_CASE("parity invariant and lockstep time") {
    Environment env = Environment::sample(two_point_law_for_kappa(0.25), 31, -64, 64);
    EnsembleState st = init_ensemble({0, 2}, {-4, 6}, 17, 4);
    for (int t = 1; t <= 512; ++t) {
        step(st, env);
        CHECK(st.time == t);
        for (int j = 0; j < st.d(); ++j)
            CHECK(((st.s_pos[j] - st.s_start[j] + t) % 2 + 2) % 2 == 0);
        for (int i = 0; i < st.p(); ++i)
            CHECK(((st.z_pos[i] - st.z_start[i] + t) % 2 + 2) % 2 == 0);
    }
}

TEST_CASE("independence of walker driving noise") {
    // Raw increments of two RWRE walkers in one environment correlate through
    // shared sites; what is independent is the noise left after centering each
    // increment by its conditional mean (omega at the pre-step site, 1/2 for Z).
    Environment env = Environment::sample(two_point_law_for_kappa(0.8), 13, -64, 64);
    EnsembleState st = init_ensemble({0, 0}, {0}, 23, 0);
    const int n = 100000;
    std::vector<double> inc_a, inc_b, inc_z;
    std::int64_t pa = 0, pb = 0, pz = 0;
    for (int t = 0; t < n; ++t) {
        const double wa = env.omega_extending(st.s_pos[0]);
        const double wb = env.omega_extending(st.s_pos[1]);
        step(st, env);
        inc_a.push_back((st.s_pos[0] > pa ? 1.0 : 0.0) - wa);
        inc_b.push_back((st.s_pos[1] > pb ? 1.0 : 0.0) - wb);
        inc_z.push_back((st.z_pos[0] > pz ? 1.0 : 0.0) - 0.5);
        pa = st.s_pos[0];
        pb = st.s_pos[1];
        pz = st.z_pos[0];
    }
    auto corr = [n](const std::vector<double>& x, const std::vector<double>& y) {
        double mx = 0, my = 0;
        for (int i = 0; i < n; ++i) {
            mx += x[static_cast<std::size_t>(i)];
            my += y[static_cast<std::size_t>(i)];
        }
        mx /= n;
        my /= n;
        double sxy = 0, sxx = 0, syy = 0;
        for (int i = 0; i < n; ++i) {
            const double dx = x[static_cast<std::size_t>(i)] - mx;
            const double dy = y[static_cast<std::size_t>(i)] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        return sxy / std::sqrt(sxx * syy);
    };
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(corr(inc_a, inc_b)) <= bound);
    CHECK(std::abs(corr(inc_a, inc_z)) <= bound);
    CHECK(std::abs(corr(inc_b, inc_z)) <= bound);
}

TEST_CASE("marginal of a simulated walker matches the DP oracle at n <= 16") {
    Environment env = Environment::sample(two_point_law_for_kappa(0.25), 41, -40, 40);
    const int R = 100000;
    const int n = 16;
    std::map<std::int64_t, std::int64_t> hist;
    for (int r = 0; r < R; ++r) {
        Environment local = env;
        EnsembleState st = init_ensemble({0}, {}, 71, static_cast<std::uint64_t>(r));
        for (int t = 0; t < n; ++t) step(st, local);
        ++hist[st.s_pos[0]];
    }
    Environment local = env;
    const auto exact = oracle::exact_marginal(local, 0, n);
    // total variation against a per-cell standard-error budget
    double tv = 0, budget = 0;
    for (std::int64_t k = -n; k <= n; k += 2) {
        const double emp = static_cast<double>(hist[k]) / R;
        const double p = exact.prob_at(k);
        tv += 0.5 * std::abs(emp - p);
        budget += 0.5 * std::sqrt(p * (1.0 - p) / R);
    }
    CHECK(tv <= 4.0 * budget);
}

TEST_CASE("run_collisions") {
    SUBCASE("collision at n=1 happens with quenched probability 1/2") {
        // S_1 = Z_1 iff Z copies S's direction; Z is uniform, so exactly 1/2
        Environment env = Environment::sample(two_point_law_for_kappa(0.25), 3, -8, 8);
        const int R = 100000;
        int hits = 0;
        for (int r = 0; r < R; ++r) {
            Environment local = env;
            EnsembleState st = init_ensemble({0}, {0}, 5, static_cast<std::uint64_t>(r));
            CollisionRecord rec = run_collisions(st, local, 1);
            for (std::size_t i = 0; i < rec.times.size(); ++i)
                if (rec.times[i] == 1) ++hits;
        }
        const double freq = static_cast<double>(hits) / R;
        const double se = std::sqrt(0.25 / R);
        CHECK(std::abs(freq - 0.5) <= 4 * se);
    }

    SUBCASE("mixed-parity starts never collide") {
        Environment env = Environment::sample(two_point_law_for_kappa(0.25), 6, -64, 64);
        EnsembleState st = init_ensemble({0}, {1}, 8, 0);
        CollisionRecord rec = run_collisions(st, env, 4096);
        CHECK(rec.times.empty());
        CHECK(rec.truncated_at == 4096);
    }

    SUBCASE("time-0 coincidence is recorded") {
        Environment env = Environment::sample(two_point_law_for_kappa(0.25), 6, -8, 8);
        EnsembleState st = init_ensemble({2}, {2}, 8, 0);
        CollisionRecord rec = run_collisions(st, env, 0);
        REQUIRE(rec.times.size() == 1);
        CHECK(rec.times[0] == 0);
        CHECK(rec.locations[0] == 2);
    }

    SUBCASE("per-time collision frequencies match the DP product-sum") {
        Environment env = Environment::sample(two_point_law_for_kappa(0.25), 51, -40, 40);
        const int R = 100000;
        const std::int64_t horizon = 16;
        std::vector<std::int64_t> hits(static_cast<std::size_t>(horizon) + 1, 0);
        for (int r = 0; r < R; ++r) {
            Environment local = env;
            EnsembleState st = init_ensemble({0}, {0}, 91, static_cast<std::uint64_t>(r));
            run_lockstep(st, local, horizon,
                         [&](std::int64_t t, std::int64_t) { ++hits[static_cast<std::size_t>(t)]; });
        }
        const std::vector<std::int64_t> s = {0}, z = {0};
        for (std::int64_t n : {8, 16}) {
            Environment local = env;
            const double exact = oracle::exact_collision_prob(local, s, z, n);
            const double emp = static_cast<double>(hits[static_cast<std::size_t>(n)]) / R;
            const double se = std::sqrt(std::max(emp * (1.0 - emp), 1e-12) / R);
            CHECK(std::abs(emp - exact) <= 4 * se);
        }
    }
}

TEST_CASE("hitting_time") {
    SUBCASE("start equals target") {
        Environment env = Environment::sample(two_point_law_for_kappa(0.25), 2, -8, 8);
        auto tau = hitting_time(env, 3, 3, 100, rng::walker_stream(1, 0, 0));
        REQUIRE(tau.has_value());
        CHECK(*tau == 0);
    }

    SUBCASE("gambler's-ruin expectation for omega = 3/4") {
        Environment env = Environment::sample(make_two_point_law({{0.75, 1.0}}), 1, -64, 64);
        const int R = 100000;
        double sum = 0;
        int reached = 0;
        for (int r = 0; r < R; ++r) {
            Environment local = env;
            auto tau = hitting_time(local, 0, 1, 10000,
                                    rng::walker_stream(33, static_cast<std::uint64_t>(r), 0));
            if (tau) {
                sum += static_cast<double>(*tau);
                ++reached;
            }
        }
        CHECK(reached == R); // a.s. finite and cap is generous
        const double mean_tau = sum / reached;
        // E[tau] = 1/(2p-1) = 2, Var = (1 - (2p-1)^2)/(2p-1)^3 = 6
        const double se = std::sqrt(6.0 / R);
        CHECK(std::abs(mean_tau - 2.0) <= 4 * se);
    }

    SUBCASE("left target against a strong right drift is not reached") {
        Environment env = Environment::sample(make_two_point_law({{0.9, 1.0}}), 1, -64, 64);
        auto tau = hitting_time(env, 0, -5, 10000, rng::walker_stream(77, 0, 0));
        CHECK(!tau.has_value());
    }
}

TEST_CASE("parity_adjusted_horizon aligns with the target site") {
    for (std::int64_t n : {0, 1, 2, 17, 362, 484863}) {
        for (std::int64_t b : {std::int64_t{0}, std::int64_t{1}, std::int64_t{-3},
                               std::int64_t{40}}) {
            const std::int64_t np = parity_adjusted_horizon(n, b);
            CHECK(((np - b) % 2 + 2) % 2 == 0);
            CHECK(np <= n);
            CHECK(np >= n - 1);
        }
    }
}

TEST_CASE("meeting_time_U") {
    Environment env = Environment::sample(two_point_law_for_kappa(0.25), 12, -64, 64);

    SUBCASE("already at the level with N = 0") {
        EnsembleState st = init_ensemble({}, {5}, 3, 0);
        auto u = meeting_time_U(st, env, 5, 0);
        REQUIRE(u.has_value());
        CHECK(*u == 0);
    }

    SUBCASE("meeting parity follows level - z1") {
        for (std::uint64_t r = 0; r < 200; ++r) {
            EnsembleState st = init_ensemble({}, {0}, 29, r);
            const std::int64_t level = 3; // odd offset: meetings only at odd times
            auto u = meeting_time_U(st, env, level, 64);
            if (u) CHECK((*u % 2 + 2) % 2 == 1);
        }
    }

    SUBCASE("frequency of {U <= 2N} matches the DP composition") {
        const std::int64_t N = 64;
        const std::int64_t level = 8;
        const int R = 20000;
        int hits = 0;
        for (int r = 0; r < R; ++r) {
            Environment local = env;
            EnsembleState st = init_ensemble({}, {0}, 57, static_cast<std::uint64_t>(r));
            if (meeting_time_U(st, local, level, N)) ++hits;
        }
        // P(U <= 2N) = sum_y P(Z_N = y) P^y(hit level within N steps), SRW kernel
        Environment srw_env = Environment::from_omega(-300, std::vector<double>(601, 0.5));
        const auto at_n = oracle::srw_marginal(0, N);
        double exact = 0;
        for (std::int64_t y = at_n.support_lo; y <= at_n.support_hi(); ++y) {
            const double py = at_n.prob_at(y);
            if (py == 0) continue;
            exact += py * oracle::exact_hitting_prob(srw_env, y, level, N);
        }
        const double emp = static_cast<double>(hits) / R;
        const double se = std::sqrt(exact * (1.0 - exact) / R);
        CHECK(std::abs(emp - exact) <= 4 * se);
    }

    SUBCASE("p = 0 is rejected") {
        EnsembleState st = init_ensemble({0}, {}, 3, 0);
        CHECK_THROWS_AS(meeting_time_U(st, env, 0, 4), ConfigError);
    }
}

TEST_SUITE_END();
