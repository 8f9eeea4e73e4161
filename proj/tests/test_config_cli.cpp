#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/cli.hpp"
#include "rwre/config.hpp"

using namespace rwre;

namespace {

struct CliResult {
    int code = 0;
    std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult res;
    res.code = cli::run(args, out, err);
    res.out = out.str();
    res.err = err.str();
    return res;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "rwre_cli_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    io::write_file(path.string(), content);
    return path;
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("toml subset parses the documented config shapes") {
    const std::string text = R"(# run configuration
seed = 7
law = { kind = "two_point", atoms = [[0.75, 0.6], [0.25, 0.4]] }

[walkers]
d = 2
p = 1
starts = [0, 0, 4]

[experiment]
horizon = 1000
replicas = 10
environments = 2
n_grid = [64, 128]
mode = "mc"
)";
    const auto root = config::parse_toml(text);
    CHECK(root.at("seed") == 7);
    CHECK(root.at("law").at("kind") == "two_point");
    CHECK(root.at("law").at("atoms")[0][0] == 0.75);
    CHECK(root.at("walkers").at("d") == 2);
    CHECK(root.at("experiment").at("n_grid")[1] == 128);

    const auto loaded = config::load_config(root);
    CHECK(loaded.exp.master_seed == 7);
    CHECK(loaded.exp.d == 2);
    CHECK(loaded.exp.p == 1);
    CHECK(loaded.exp.starts == std::vector<std::int64_t>{0, 0, 4});
    CHECK(loaded.exp.law.kind == LawKind::two_point);
    CHECK(loaded.exp.mode == "mc");
    CHECK(!loaded.law_b.has_value());
}

TEST_CASE("toml parses the uniform law block and regime comparator") {
    const std::string text = R"(law = { kind = "uniform_interval", lo = 0.6, hi = 0.75 }
[regime]
law_b = { kind = "two_point", atoms = [[0.75, 0.75], [0.25, 0.25]] }
)";
    const auto loaded = config::load_config(config::parse_toml(text));
    CHECK(loaded.exp.law.kind == LawKind::uniform_interval);
    CHECK(loaded.exp.law.lo == 0.6);
    REQUIRE(loaded.law_b.has_value());
    CHECK(loaded.law_b->atoms.size() == 2);
}

TEST_CASE("toml rejects unknown keys and malformed input") {
    CHECK_THROWS_AS(config::load_config(config::parse_toml("sede = 7\n")), ConfigError);
    CHECK_THROWS_AS(config::load_config(config::parse_toml("[walkers]\nq = 1\n")), ConfigError);
    CHECK_THROWS_AS(config::parse_toml("law = { kind = \"two_point\"\n"), ConfigError);
    CHECK_THROWS_AS(config::parse_toml("x = [1, 2\n"), ConfigError);
    CHECK_THROWS_AS(config::parse_toml("x = 1 y = 2\n"), ConfigError);
    CHECK_THROWS_AS(config::parse_toml("seed = 7\nseed = 8\n"), ConfigError);
}

TEST_CASE("law descriptors") {
    const auto tp = config::law_from_descriptor("two_point:0.75@0.75,0.25@0.25");
    CHECK(tp.kind == LawKind::two_point);
    CHECK(tp.atoms.size() == 2);
    CHECK(tp.atoms[0].value == 0.75);

    const auto uni = config::law_from_descriptor("uniform_interval:0.6,0.75");
    CHECK(uni.kind == LawKind::uniform_interval);

    const auto fs = config::law_from_descriptor("finite_support:0.3@0.2,0.55@0.5,0.8@0.3");
    CHECK(fs.kind == LawKind::finite_support);
    CHECK(fs.atoms.size() == 3);

    CHECK_THROWS_AS(config::law_from_descriptor("two_point"), ConfigError);
    CHECK_THROWS_AS(config::law_from_descriptor("nope:1,2"), ConfigError);
    CHECK_THROWS_AS(config::law_from_descriptor("two_point:abc@1"), ConfigError);
}

TEST_CASE("solve-kappa subcommand prints the closed-form root") {
    const auto res = run_cli({"solve-kappa", "--law", "two_point:0.75@0.75,0.25@0.25"});
    CHECK(res.code == 0);
    CHECK(res.out.find("kappa=1") == 0);
    CHECK(res.out.find("residual=") != std::string::npos);
    CHECK(res.out.find("mean_log_rho=-") != std::string::npos);
}

TEST_CASE("solve-kappa maps law failures to exit 2") {
    const auto res = run_cli({"solve-kappa", "--law", "uniform_interval:0.6,0.75"});
    CHECK(res.code == 2);
    CHECK(res.err.find("NoRootBelowCap") != std::string::npos);
}

TEST_CASE("simulate is byte-identical across repeated runs") {
    const std::vector<std::string> args = {"simulate", "--law",
                                           "two_point:0.75@0.5682348688308036,0.25@0.4317651311691964",
                                           "--d", "1", "--p", "1", "--starts", "0,0",
                                           "--horizon", "100", "--replicas", "10",
                                           "--seed", "7"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("# rwre-lab csv schema: simulate v1\nreplica,time,location\n") == 0);
}

TEST_CASE("gen-env output is deterministic and carries the potential") {
    const std::vector<std::string> args = {"gen-env", "--law", "uniform_interval:0.31,0.715",
                                           "--seed", "5", "--lo", "-4", "--hi", "4"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("x,omega,V") != std::string::npos);
}

TEST_CASE("dp-exact emits 17-digit round-trippable probabilities") {
    const auto res = run_cli({"dp-exact", "--srw", "--start", "0", "--n", "2"});
    CHECK(res.code == 0);
    CHECK(res.out.find("# rwre-lab csv schema: dp-exact v1\nn,k,prob,leak\n") == 0);
    CHECK(res.out.find("2,0,0.5,0") != std::string::npos);
    CHECK(res.out.find("2,-2,0.25,0") != std::string::npos);

    // a quenched case round-trips through the printed decimal
    const auto q = run_cli({"dp-exact", "--law", "two_point:0.75@0.6,0.25@0.4", "--seed", "3",
                            "--n", "9", "--start", "1"});
    CHECK(q.code == 0);
    std::istringstream lines(q.out);
    std::string line;
    std::getline(lines, line); // schema
    std::getline(lines, line); // header
    Environment env = Environment::sample(
        config::law_from_descriptor("two_point:0.75@0.6,0.25@0.4"), 3, -16, 16);
    const auto exact = oracle::exact_marginal(env, 1, 9);
    int rows = 0;
    while (std::getline(lines, line)) {
        long n = 0, k = 0;
        double prob = 0, leak = 0;
        REQUIRE(std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &n, &k, &prob, &leak) == 4);
        CHECK(prob == exact.prob_at(k)); // exact bit round-trip
        ++rows;
    }
    CHECK(rows == 10);
}

TEST_CASE("collision-exact emits one row per time") {
    const auto res = run_cli({"collision-exact", "--law", "two_point:0.75@0.6,0.25@0.4",
                              "--seed", "2", "--s-starts", "0", "--z-starts", "0", "--n",
                              "2,4,8"});
    CHECK(res.code == 0);
    CHECK(res.out.find("n,prob") != std::string::npos);
    int rows = 0;
    std::istringstream lines(res.out);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty() && line[0] != '#' && line.find("n,prob") == std::string::npos) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("analyze-potential emits the pinned column contract") {
    const auto res = run_cli({"analyze-potential", "--law",
                              "two_point:0.75@0.5682348688308036,0.25@0.4317651311691964",
                              "--seed", "4", "--x-max", "2000", "--kappa", "0.25",
                              "--epsilon", "0.5"});
    CHECK(res.code == 0);
    CHECK(res.out.find("i,e_i,V_e_i,H_i,sigma_i,b_i,f_i,log_N_i,b_bound_ok\n") !=
          std::string::npos);
}

TEST_CASE("experiment subcommand writes report.json and csv tables") {
    const auto dir = std::filesystem::temp_directory_path() / "rwre_cli_tests" / "exp_out";
    std::filesystem::remove_all(dir);
    const auto cfg = temp_file("lil.toml", R"(seed = 3
[experiment]
replicas = 20
n_grid = [1024, 2048]
)");
    const auto res = run_cli({"experiment", "--probe", "lil", "--config", cfg.string(), "--out",
                              dir.string()});
    CHECK(res.code == 0);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "lil.csv"));
    const std::string report = io::read_file((dir / "report.json").string());
    CHECK(report.find("\"schema_version\"") != std::string::npos);
    CHECK(report.find("\"seed\": 3") != std::string::npos);
    CHECK(report.find("Finite-horizon") != std::string::npos);
}

TEST_CASE("experiment srw-decay with p=2 exits 2 citing the requirement") {
    const auto cfg = temp_file("p2.toml", R"(law = { kind = "two_point", atoms = [[0.75, 0.5682348688308036], [0.25, 0.4317651311691964]] }
[walkers]
d = 1
p = 2
)");
    const auto res = run_cli({"experiment", "--probe", "srw-decay", "--config", cfg.string(),
                              "--out", (std::filesystem::temp_directory_path() /
                                        "rwre_cli_tests" / "p2_out").string()});
    CHECK(res.code == 2);
    CHECK(res.err.find("p >= 3") != std::string::npos);
}

TEST_CASE("experiment return probe exits 3 when the schedule is out of reach") {
    const auto cfg = temp_file("deep_i.toml", R"(law = { kind = "two_point", atoms = [[0.75, 0.5682348688308036], [0.25, 0.4317651311691964]] }
seed = 5
[schedule]
kappa = 0.25
epsilon = 0.5
[experiment]
environments = 1
replicas = 10
i_list = [5]
)");
    const auto res = run_cli({"experiment", "--probe", "return", "--config", cfg.string(),
                              "--out", (std::filesystem::temp_directory_path() /
                                        "rwre_cli_tests" / "deep_out").string()});
    CHECK(res.code == 3);
    CHECK(res.err.find("ScheduleOutOfReach") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli({"no-such-subcommand"}).code == 2);
    CHECK(run_cli({"solve-kappa"}).code == 2);                // missing --law
    CHECK(run_cli({"solve-kappa", "--nope", "x"}).code == 2); // unknown flag
    CHECK(run_cli({}).code == 2);                             // no subcommand
}

TEST_CASE("flags win over the config file") {
    const auto cfg = temp_file("seed9.toml", R"(seed = 9
[experiment]
replicas = 20
n_grid = [1024, 2048]
)");
    const auto dir = std::filesystem::temp_directory_path() / "rwre_cli_tests" / "ovr_out";
    std::filesystem::remove_all(dir);
    const auto res = run_cli({"experiment", "--probe", "lil", "--config", cfg.string(), "--out",
                              dir.string(), "--seed", "123"});
    CHECK(res.code == 0);
    const std::string report = io::read_file((dir / "report.json").string());
    CHECK(report.find("\"seed\": 123") != std::string::npos);
}

TEST_SUITE_END();
