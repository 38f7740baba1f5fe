#include <doctest.h>

#include <sstream>

#include "pct/schema.hpp"

using namespace pct;
using namespace pct::schema;
using nlohmann::json;

namespace {

TrainingRecord sample_record() {
    TrainingRecord r;
    r.run_id = "run_0003";
    r.record_id = 42;
    r.agent = 17;
    r.observables.day = 20;
    r.observables.profile.age = AgeBand::Senior;
    r.observables.profile.sex = Sex::Male;
    r.observables.profile.conditions = 0b101;
    r.observables.slots.resize(15);
    for (int k = 0; k < 12; ++k) r.observables.slots[static_cast<std::size_t>(k)] = DaySlot{};
    r.observables.slots[0]->health.reported_symptoms.insert(Symptom::Fever);
    r.observables.slots[0]->health.reported_symptoms.insert(Symptom::Anosmia);
    r.observables.slots[1]->health.test_result = TestResult::positive(18);
    r.observables.slots[4]->encounters = {{RiskLevel(3), 2}, {RiskLevel(15), 1}};
    r.targets.assign(15, 0.0);
    r.targets[2] = 0.625;
    return r;
}

std::string error_of(const json& j) {
    try {
        record_from_json(j);
    } catch (const std::runtime_error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("record round trip") {
    const TrainingRecord r = sample_record();
    const json j = record_to_json(r);
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["slots"].size() == 15);
    CHECK(j["slots"][12].is_null());
    CHECK(j["slots"][4]["encounters"] == json::parse("[[3,2],[15,1]]"));
    CHECK(j["slots"][0]["test_day"].is_null());

    const TrainingRecord back = record_from_json(json::parse(j.dump()));
    CHECK(back.run_id == r.run_id);
    CHECK(back.record_id == r.record_id);
    CHECK(back.agent == r.agent);
    CHECK(back.targets == r.targets);
    CHECK(back.observables == r.observables);
    CHECK(record_to_json(back) == j);
}

TEST_CASE("request omits targets and agent") {
    const TrainingRecord r = sample_record();
    const json j = request_to_json(r.run_id, r.record_id, r.observables);
    CHECK_FALSE(j.contains("targets"));
    CHECK_FALSE(j.contains("agent"));
    CHECK(observables_from_json(j) == r.observables);
}

TEST_CASE("prediction round trip") {
    const Prediction p{"run_0001", 9, {0.0, 0.25, 1.0}};
    const Prediction back = prediction_from_json(prediction_to_json(p));
    CHECK(back.run_id == p.run_id);
    CHECK(back.record_id == p.record_id);
    CHECK(back.y_hat == p.y_hat);
}

TEST_CASE("malformed records name the field") {
    const json good = record_to_json(sample_record());

    json j = good;
    j.erase("targets");
    CHECK(error_of(j).find("'targets'") != std::string::npos);

    j = good;
    j["schema_version"] = 99;
    CHECK(error_of(j).find("'schema_version'") != std::string::npos);

    j = good;
    j["targets"][0] = 1.5;
    CHECK(error_of(j).find("'targets'") != std::string::npos);

    j = good;
    j["targets"].erase(0);
    CHECK(error_of(j).find("'targets'") != std::string::npos);

    j = good;
    j["slots"][4]["encounters"] = json::parse("[[16,1]]");
    CHECK(error_of(j).find("'encounters'") != std::string::npos);

    j = good;
    j["slots"][0]["symptoms"] = json::parse("[\"sneezing\"]");
    CHECK(error_of(j).find("'symptom'") != std::string::npos);

    j = good;
    j["slots"][2]["day_offset"] = 3;
    CHECK(error_of(j).find("'day_offset'") != std::string::npos);

    j = good;
    j["profile"]["age"] = "teen";
    CHECK(error_of(j).find("'age'") != std::string::npos);

    j = good;
    j["record_id"] = "x";
    CHECK(error_of(j).find("'record_id'") != std::string::npos);

    j = good;
    j["slots"][1]["test_day"] = nullptr;
    CHECK(error_of(j).find("'test_day'") != std::string::npos);
}

TEST_CASE("jsonl reading") {
    std::stringstream ss;
    write_jsonl_line(ss, json{{"a", 1}});
    ss << "\n   \n";
    write_jsonl_line(ss, json{{"a", 2}});
    const auto values = read_jsonl(ss);
    REQUIRE(values.size() == 2);
    CHECK(values[1]["a"] == 2);

    std::stringstream broken("{\"a\":1}\n{oops\n");
    try {
        read_jsonl(broken);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).starts_with("line 2:"));
    }
    CHECK_THROWS_AS(read_jsonl_file("/nonexistent/records.jsonl"), std::runtime_error);
}
