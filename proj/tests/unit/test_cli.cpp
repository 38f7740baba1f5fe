#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pct/config.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "pct_cli_test";

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result sim(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + TRACE_SIM_BIN + " " + args + " > " + (kDir / "stdout").string() + " 2> " +
                            (kDir / "stderr").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(kDir / "stdout"), slurp(kDir / "stderr")};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = kDir / name;
    std::ofstream(p) << text;
    return p;
}

const char* kSmall =
    "population_size = 300\nnum_days = 20\nglobal_mobility_scale = 2\nbase_transmission_rate = 0.08\n"
    "initial_exposed_fraction = 0.02\npolicy = PCT\n";

struct Fixture {
    Fixture() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
    ~Fixture() { fs::remove_all(kDir); }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "usage errors exit with 1") {
    CHECK(sim("").code == 1);
    CHECK(sim("fly").code == 1);
    CHECK(sim("run --out x").code == 1);

    const auto missing = sim("run --config /no/such/dir/a.cfg --out " + (kDir / "o").string());
    CHECK(missing.code == 1);
    CHECK(missing.err.find("/no/such/dir/a.cfg") != std::string::npos);

    const auto bad_key = sim("run --config " + write_config("bad.cfg", "speed = 3\n").string() + " --out o");
    CHECK(bad_key.code == 1);
    CHECK(bad_key.err.find("speed") != std::string::npos);

    const auto bad_env = sim("run --config " + write_config("ok.cfg", kSmall).string() + " --out o", "TRACE_SIM_SEED=abc");
    CHECK(bad_env.code == 1);
    CHECK(sim("pareto --config " + (kDir / "ok.cfg").string() + " --seeds 5:2 --out p.csv").code == 1);
    CHECK(sim("adoption --config " + (kDir / "ok.cfg").string() + " --adoptions 0.9 --out a.csv").code == 1);
    CHECK(sim("run --config " + (kDir / "ok.cfg").string() + " --policy PCT-psychic --out o").code == 1);
    CHECK(sim("--help").code == 0);
}

TEST_CASE_FIXTURE(Fixture, "run writes three files and is reproducible") {
    const auto cfg = write_config("small.cfg", kSmall).string();
    const auto a = sim("run --config " + cfg + " --seed 4 --out " + (kDir / "a").string());
    REQUIRE(a.code == 0);
    for (const char* f : {"trace.jsonl", "events.jsonl", "metrics.csv"}) CHECK(fs::is_regular_file(kDir / "a" / f));
    CHECK(a.out.starts_with("config_hash,seed,policy"));

    REQUIRE(sim("run --config " + cfg + " --seed 4 --out " + (kDir / "b").string()).code == 0);
    for (const char* f : {"trace.jsonl", "events.jsonl", "metrics.csv"}) {
        CHECK(slurp(kDir / "a" / f) == slurp(kDir / "b" / f));
    }

    std::istringstream trace(slurp(kDir / "a" / "trace.jsonl"));
    std::string line;
    int days = 0;
    while (std::getline(trace, line)) {
        if (!line.empty()) CHECK_NOTHROW((void)json::parse(line));
        ++days;
    }
    CHECK(days >= 21);

    // --seed beats the environment, the environment beats the config.
    REQUIRE(sim("run --config " + cfg + " --seed 4 --out " + (kDir / "c").string(), "TRACE_SIM_SEED=9").code == 0);
    CHECK(slurp(kDir / "c" / "events.jsonl") == slurp(kDir / "a" / "events.jsonl"));
    REQUIRE(sim("run --config " + cfg + " --out " + (kDir / "d").string(), "TRACE_SIM_SEED=4").code == 0);
    CHECK(slurp(kDir / "d" / "events.jsonl") == slurp(kDir / "a" / "events.jsonl"));
    REQUIRE(sim("run --config " + cfg + " --out " + (kDir / "e").string(), "TRACE_SIM_SEED=5").code == 0);
    CHECK(slurp(kDir / "e" / "events.jsonl") != slurp(kDir / "a" / "events.jsonl"));
}

TEST_CASE_FIXTURE(Fixture, "sweeps write one row per cell") {
    const auto cfg = write_config("small.cfg", kSmall).string();
    const auto p = sim("pareto --config " + cfg + " --scales 1,2,1 --seeds 1:2 --policy NT,BCT --jobs 2 --out " +
                       (kDir / "p.csv").string());
    REQUIRE(p.code == 0);
    CHECK(p.err.find("scale") != std::string::npos);
    std::istringstream rows(slurp(kDir / "p.csv"));
    std::string line;
    int n = 0;
    while (std::getline(rows, line)) ++n;
    CHECK(n == 1 + 2 * 2 * 2);

    REQUIRE(sim("adoption --config " + cfg + " --adoptions 0,0.3 --seeds 3 --policy PCT-Oracle --out " +
                (kDir / "a.csv").string())
                .code == 0);
    std::istringstream arows(slurp(kDir / "a.csv"));
    n = 0;
    while (std::getline(arows, line)) ++n;
    CHECK(n == 3);
}

TEST_CASE_FIXTURE(Fixture, "datagen, echo and evaluate") {
    const auto cfg = write_config("dg.cfg", "population_size = 300\nnum_days = 15\n").string();
    const fs::path out = kDir / "dg";
    const auto d = sim("datagen --config " + cfg + " --runs 3 --seed 2 --out " + out.string());
    REQUIRE(d.code == 0);
    const json manifest = json::parse(slurp(out / "manifest.json"));
    const json split = json::parse(slurp(out / "split.json"));
    CHECK(split["train"].size() + split["valid"].size() == 3);
    REQUIRE(manifest["runs"].size() == 3);
    for (const auto& run : manifest["runs"]) {
        CHECK(run["status"] == "ok");
        const std::string body = slurp(out / run["file"].get<std::string>());
        CHECK(pct::fnv1a_hex(body) == run["records_hash"]);
        CHECK(std::count(body.begin(), body.end(), '\n') == run["records"].get<long>());
    }

    std::string all;
    for (const auto& e : fs::directory_iterator(out / "runs")) all += slurp(e.path());
    std::ofstream(kDir / "all.jsonl") << all;
    REQUIRE(sim("echo-targets --records " + (kDir / "all.jsonl").string() + " --out " + (kDir / "pred.jsonl").string())
                .code == 0);
    const auto ev = sim("evaluate --records " + (kDir / "all.jsonl").string() + " --predictions " +
                        (kDir / "pred.jsonl").string());
    REQUIRE(ev.code == 0);
    CHECK(ev.out.starts_with("mse=0 "));

    std::ofstream(kDir / "junk.jsonl") << "{not json\n";
    CHECK(sim("evaluate --records " + (kDir / "junk.jsonl").string() + " --predictions " +
              (kDir / "pred.jsonl").string())
              .code == 2);
}
