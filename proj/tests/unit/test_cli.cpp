#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "capdual/experiments.hpp"

using namespace capdual;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("capdual_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(CAPDUAL_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* kDuality = R"({
  "experiment": "duality",
  "vector": {"rank": 1, "terms": [{"weight": [1], "q": "1/2"}, {"weight": [-1], "q": "1/2"}]},
  "theta": [0],
  "k_max": 200
})";

}  // namespace

TEST_CASE("duality run writes the CSV and a passing summary") {
    const auto dir = fresh_dir("duality");
    RunOptions o;
    o.out_dir = dir;
    const auto r = run_experiment(kDuality, o);
    CHECK(r.exit_code == 0);
    CHECK(r.pass);
    const auto csv = slurp(r.csv);
    CHECK(csv.rfind("k,log_norm[ln],rate[ln],log_cap[ln],gap[ln]\n", 0) == 0);
    std::istringstream lines(csv);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 101);
    const auto s = nlohmann::json::parse(slurp(r.summary));
    CHECK(s["pass"] == true);
    CHECK(s["experiment"] == "duality");
    CHECK(s["seed"] == 1);
    CHECK(s["version"].get<std::string>().rfind("0.1.0+", 0) == 0);
    CHECK(s["headline"]["final_ratio"].get<double>() >= 0.985);
    CHECK(s["tolerances"]["ratio_range"][0] == 0.985);
    fs::remove_all(dir);
}

TEST_CASE("reports are byte-identical across runs") {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const std::string mc = R"({"experiment": "mc-check", "group": "torus", "k": 2, "samples": 20000, "runs": 3,
      "vector": {"rank": 1, "terms": [{"weight": [1], "q": 0.5}, {"weight": [-1], "q": 0.5}]}})";
    RunOptions oa, ob;
    oa.out_dir = a;
    ob.out_dir = b;
    oa.seed = ob.seed = 99;
    const auto ra = run_experiment(mc, oa), rb = run_experiment(mc, ob);
    CHECK(slurp(ra.csv) == slurp(rb.csv));
    CHECK(slurp(ra.summary) == slurp(rb.summary));
    ob.seed = 100;
    const auto rc = run_experiment(mc, ob);
    CHECK(slurp(ra.csv) != slurp(rc.csv));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("perm-dual J2 rows match the library report") {
    const auto dir = fresh_dir("perm");
    RunOptions o;
    o.out_dir = dir;
    const auto r = run_experiment(R"({"experiment": "perm-dual", "matrix": [[1, 1], [1, 1]],
        "r": ["1/2", "1/2"], "c": ["1/2", "1/2"], "k_max": 60})", o);
    CHECK(r.exit_code == 0);
    const auto s = nlohmann::json::parse(slurp(r.summary));
    bool sandwich = false;
    for (const auto& c : s["checks"])
        if (c["name"] == "sandwich") sandwich = c["pass"].get<bool>();
    CHECK(sandwich);
    const auto csv = slurp(r.csv);
    CHECK(csv.find("\n2,4,") != std::string::npos);
    CHECK(csv.find("\n4,36,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("tolerance failures exit 2") {
    const auto dir = fresh_dir("fail");
    RunOptions o;
    o.out_dir = dir;
    const auto r = run_experiment(R"({"experiment": "duality", "k_max": 20,
        "vector": {"rank": 1, "terms": [{"weight": [1], "q": 0.5}, {"weight": [-1], "q": 0.5}]},
        "theta": [0], "tolerances": {"ratio_range": [0.999, 1.0]}})", o);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.pass);
    CHECK(fs::exists(r.summary));
    fs::remove_all(dir);
}

TEST_CASE("config errors") {
    const auto dir = fresh_dir("errors");
    RunOptions o;
    o.out_dir = dir;
    CHECK_THROWS_WITH_AS(run_experiment(R"({"experiment": "nope"})", o), doctest::Contains("unknown experiment"), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment("{\n  \"experiment\": \"duality\",\n  \"k_max\": ,\n}", o),
                         doctest::Contains("line 3, column"), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment(R"({"experiment": "duality", "vector": {"rank": 1, "terms": []},
        "theta": [0], "colour": 1})", o), doctest::Contains("unknown field \"colour\""), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment(R"({"experiment": "duality", "theta": [0]})", o),
                         doctest::Contains("missing field \"vector\""), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment(R"({"experiment": "duality", "theta": [0],
        "vector": {"rank": 1, "terms": [{"weight": [1], "q": 1, "amplitude": 1}]}})", o),
                         doctest::Contains("/vector/terms/0"), ConfigError);
    CHECK_THROWS_WITH_AS(run_experiment(R"({"experiment": "duality", "theta": [0], "tolerances": {"bogus": 1},
        "vector": {"rank": 1, "terms": [{"weight": [1], "q": 1}]}})", o),
                         doctest::Contains("config/tolerances"), ConfigError);
    CHECK_THROWS_AS(run_experiment(R"({"experiment": "schur-weyl-ldp", "q": [0.3, 0.7], "theta": ["1/2", "1/2"]})", o), Error);
    CHECK(fs::is_empty(dir));
    fs::remove_all(dir);
}

TEST_CASE("every experiment runs from a minimal config") {
    const auto dir = fresh_dir("all");
    RunOptions o;
    o.out_dir = dir;
    const std::vector<std::string> configs = {
        R"({"experiment": "prefactor", "k_max": 200,
            "vector": {"rank": 1, "terms": [{"weight": [1], "q": 0.5}, {"weight": [-1], "q": 0.5}]}})",
        R"({"experiment": "schur-weyl-ldp", "sigma": [[0.6, [0.1, 0.1]], [[0.1, -0.1], 0.4]],
            "theta": ["3/4", "1/4"], "k_max": 40, "tolerances": {"checkpoints": []}})",
        R"({"experiment": "duffield-ldp", "weights": [2, 0, -2], "theta": "1", "k_max": 50, "tolerances": {"checkpoints": []}})",
        R"({"experiment": "mc-check", "group": "U", "rep": "standard", "state": [0.6, [0, 0.8]], "lambda": [2, 1],
            "k": 3, "samples": 20000})",
        R"({"experiment": "capacity", "theta": ["1/2"],
            "vector": {"rank": 1, "terms": [{"weight": [1], "q": 0.8}, {"weight": [-1], "q": 0.2}]}})",
        R"({"experiment": "laurent", "coefficients": {"2": [0, 1], "-1": 1}, "k_max": 12,
            "tolerances": {"ratio_range": [0, 1]}})",
    };
    for (const auto& c : configs) {
        const auto r = run_experiment(c, o);
        CHECK_MESSAGE(r.exit_code == 0, c);
    }
    fs::remove_all(dir);
}

TEST_CASE("experiment listing") {
    const auto a = list_experiments();
    CHECK(a == list_experiments());
    for (const char* name : {"duality", "prefactor", "perm-dual", "schur-weyl-ldp", "duffield-ldp", "mc-check", "capacity", "laurent"})
        CHECK(a.find(std::string(name) + "\n  checks: ") != std::string::npos);
    CHECK(a.find("duality") < a.find("prefactor"));
    for (const auto& e : experiment_catalog()) CHECK_FALSE(e.checks.empty());
}

TEST_CASE("command line exit codes") {
    const auto dir = fresh_dir("cli");
    {
        std::ofstream(dir / "ok.json") << kDuality;
        std::ofstream(dir / "unknown.json") << R"({"experiment": "nope"})";
        std::ofstream(dir / "broken.json") << "{\"experiment\": ";
    }
    const auto out = dir / "out";
    CHECK(run_cli("run " + (dir / "ok.json").string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "duality.csv"));
    CHECK(run_cli("run " + (dir / "unknown.json").string() + " --out " + (dir / "none").string()) == 1);
    CHECK_FALSE(fs::exists(dir / "none"));
    CHECK(run_cli("run " + (dir / "broken.json").string() + " --out " + (dir / "none").string()) == 1);
    CHECK(run_cli("run " + (dir / "missing.json").string()) == 1);
    CHECK(run_cli("list") == 0);
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") != 0);
    CHECK(run_cli("list", "CAPDUAL_THREADS=x") == 1);
    CHECK(run_cli("list", "CAPDUAL_THREADS=2") == 0);
    fs::remove_all(dir);
}
