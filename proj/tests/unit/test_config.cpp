#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pct/config.hpp"

using namespace pct;
namespace fs = std::filesystem;

namespace {

std::string field_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults") {
    const SimConfig c;
    CHECK(c.population_size == 3000);
    CHECK(c.num_days == 50);
    CHECK(c.smartphone_rate == 0.712);
    CHECK(c.carefulness == 0.65);
    CHECK(c.d_max == 14);
    CHECK(c.psi.front() == 1);
    CHECK(c.psi.back() == 4);
    CHECK_NOTHROW(validate(c));
    CHECK(parse_config("") == c);
}

TEST_CASE("canonical text round trip") {
    SimConfig c;
    c.population_size = 1234;
    c.adoption_rate = 0.3;
    c.global_mobility_scale = 2.0625;
    c.policy = Policy::PCT;
    c.predictor.kind = PredictorKind::NoisyOracle;
    c.predictor.add_sigma = 0.05;
    c.base_transmission_rate = 0.0751953125;
    c.psi[7] = 3;
    c.heuristic.risk_for_high = 13;
    c.record_encounters = true;
    for (std::size_t i = 0; i < c.thresholds.cuts.size(); ++i) c.thresholds.cuts[i] = 0.01 * (i + 1) + 1e-9;
    const std::string text = to_config_text(c);
    CHECK(parse_config(text) == c);
    CHECK(to_config_text(parse_config(text)) == text);
}

TEST_CASE("comments, whitespace and aliases") {
    const SimConfig c = parse_config("# header\n  policy =  bct  # trailing\n\nnum_days=10\npredictor = noisy\n");
    CHECK(c.policy == Policy::BCT);
    CHECK(c.num_days == 10);
    CHECK(c.predictor.kind == PredictorKind::NoisyOracle);
    CHECK(parse_policy("NT") == Policy::NoTracing);
    CHECK(policy_label(Policy::PCT, PredictorKind::Oracle) == "PCT-Oracle");
    CHECK(policy_label(Policy::NoTracing, PredictorKind::Oracle) == "NT");
}

TEST_CASE("invalid configs name the field") {
    CHECK(field_of("no_such_key = 1") == "no_such_key");
    CHECK(field_of("population_size = many") == "population_size");
    CHECK(field_of("adoption_rate = 1.5") == "adoption_rate");
    CHECK(field_of("adoption_rate = 0.8") == "adoption_rate");
    CHECK(field_of("carefulness = -0.1") == "carefulness");
    CHECK(field_of("d_max = 16") == "d_max");
    CHECK(field_of("policy = magic") == "policy");
    CHECK(field_of("policy = PCT\npredictor = External") == "external_predictor_cmd");
    CHECK(field_of("psi = 1,2,3") == "psi");
    CHECK(field_of("psi = 1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,5") == "psi");
    CHECK(field_of("risk_thresholds = 1,2") == "risk_thresholds");
    CHECK(field_of("risk_thresholds = 1,2,3,4,5,6,7,8,9,10,11,12,13,14,14") == "risk_thresholds");
    CHECK(field_of("record_encounters = maybe") == "record_encounters");
    CHECK(field_of("just text") == "line 1");
}

TEST_CASE("config hash ignores the seed only") {
    SimConfig a;
    SimConfig b = a;
    b.rng_seed = 99;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.adoption_rate = 0.3;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("files") {
    const fs::path dir = fs::temp_directory_path() / "pct_config_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RiskThresholds t;
    for (std::size_t i = 0; i < t.cuts.size(); ++i) t.cuts[i] = 0.03 * static_cast<double>(i + 1);
    save_thresholds(t, dir / "thresholds.txt");
    CHECK(load_thresholds(dir / "thresholds.txt") == t);

    std::ofstream(dir / "run.cfg") << "population_size = 500\nrisk_thresholds_file = thresholds.txt\n";
    const SimConfig c = load_config(dir / "run.cfg");
    CHECK(c.population_size == 500);
    CHECK(c.thresholds == t);

    try {
        load_config(dir / "missing.cfg");
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("missing.cfg") != std::string::npos);
    }
    std::ofstream(dir / "bad.cfg") << "risk_thresholds_file = nope.txt\n";
    CHECK_THROWS_AS(load_config(dir / "bad.cfg"), ConfigError);
    fs::remove_all(dir);
}
