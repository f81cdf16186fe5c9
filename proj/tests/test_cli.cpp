#include <bmlab/config.hpp>
#include <bmlab/experiments.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("experiment config serializes losslessly") {
    bmlab::ExperimentConfig c;
    c.experiment = "confluence";
    c.n = 12345;
    c.m = 512;
    c.seeds = 7;
    c.seed_base = 99;
    c.samples = 321;
    c.eps = 0.275;
    c.beta = 0.125;
    c.tol = 1.5e-3;
    c.cap = 128;
    c.oracle = true;
    c.out_dir = "some/dir";
    const std::string text = c.to_string();
    const bmlab::ExperimentConfig back = bmlab::ExperimentConfig::parse(text);
    REQUIRE(back.to_string() == text);
    REQUIRE(back.eps == c.eps);
    REQUIRE(back.tol == c.tol);
    REQUIRE(back.n == c.n);
    REQUIRE(back.oracle == c.oracle);

    const fs::path path = fs::temp_directory_path() / "bmlab_test_config.txt";
    c.save(path.string());
    const bmlab::ExperimentConfig loaded = bmlab::ExperimentConfig::load(path.string());
    REQUIRE(loaded.to_string() == text);
    fs::remove(path);
}

TEST_CASE("config validation rejects out-of-range values") {
    bmlab::ExperimentConfig c;
    c.eps = 0.7;
    CHECK_THROWS_AS(c.validate(), bmlab::ConfigError);
    c = {};
    c.experiment = "nonsense";
    CHECK_THROWS_AS(c.validate(), bmlab::ConfigError);
    c = {};
    c.n = 0;
    CHECK_THROWS_AS(c.validate(), bmlab::ConfigError);
    c = {};
    c.validate();  // defaults are valid
    CHECK_THROWS_AS(bmlab::ExperimentConfig::parse("unknown_key=1"), bmlab::ConfigError);
}

TEST_CASE("cli reports usage errors with exit code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run --no-such-flag 3") == 2);
    CHECK(run_cli("run --experiment nonsense --n 100") == 2);
    CHECK(run_cli("run --experiment confluence --n 100 --eps 0.9") == 2);
    CHECK(run_cli("snake --m 128 --oracle") == 2);  // oracle mode is exhaustive
}

TEST_CASE("sample writes maps idempotently") {
    const fs::path dir = fresh_dir("bmlab_cli_sample");
    const std::string args = "sample --n 80 --seeds 2 --out " + dir.string();
    REQUIRE(run_cli(args) == 0);
    const fs::path map1 = dir / "maps" / "qm_n80_s1.qm1";
    const fs::path map2 = dir / "maps" / "qm_n80_s2.qm1";
    REQUIRE(fs::exists(map1));
    REQUIRE(fs::exists(map2));
    const std::string before = slurp(map1);
    REQUIRE(run_cli(args) == 0);  // rerun must not rewrite differently
    REQUIRE(slurp(map1) == before);
    const bmlab::QuadMap q = bmlab::load_quadmap(map1.string());
    bmlab::check_quadmap(q);
    REQUIRE(q.n == 80);
    fs::remove_all(dir);
}

TEST_CASE("corrupt stored maps surface as data errors with exit code 3") {
    const fs::path dir = fresh_dir("bmlab_cli_corrupt");
    fs::create_directories(dir / "maps");
    std::ofstream(dir / "maps" / "qm_n300_s1.qm1") << "this is not a map";
    CHECK(run_cli("run --experiment confluence --n 300 --seeds 1 --samples 5 --out " +
                  dir.string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("snake subcommand validates its oracle and writes records") {
    const fs::path dir = fresh_dir("bmlab_cli_snake");
    REQUIRE(run_cli("snake --m 32 --samples 10 --seeds 1 --oracle --out " + dir.string()) == 0);
    const std::string records = slurp(dir / "records.jsonl");
    CHECK(records.find("\"snake\"") != std::string::npos);
    CHECK(records.find("oracle_max_diff") != std::string::npos);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "config.txt"));
    fs::remove_all(dir);
}

TEST_CASE("enumerate-small validates the exhaustive counts") {
    const fs::path dir = fresh_dir("bmlab_cli_enum");
    REQUIRE(run_cli("enumerate-small --n 3 --out " + dir.string()) == 0);
    const std::string records = slurp(dir / "records.jsonl");
    CHECK(records.find("enumerate-small") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("run all produces one record per experiment") {
    const fs::path dir = fresh_dir("bmlab_cli_all");
    REQUIRE(run_cli("run --experiment all --n 1000 --m 256 --samples 24 --seeds 1 --out " +
                    dir.string()) == 0);
    const std::string records = slurp(dir / "records.jsonl");
    for (const char* name : {"confluence", "dimension", "cutlocus", "stars", "networks", "probe"}) {
        INFO("experiment " << name);
        CHECK(records.find(std::string("\"") + name + "\"") != std::string::npos);
    }
    const std::string csv = slurp(dir / "summary.csv");
    CHECK(csv.rfind("experiment,n,seed,params,metric,value", 0) == 0);
    CHECK(fs::exists(dir / "maps" / "qm_n1000_s1.qm1"));
    fs::remove_all(dir);
}
