#include "pct/schema.hpp"

#include <fstream>
#include <stdexcept>

namespace pct::schema {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw std::runtime_error("record field '" + field + "': " + what);
}

const json& field(const json& j, const char* name) {
    if (!j.is_object()) bad(name, "enclosing value is not an object");
    const auto it = j.find(name);
    if (it == j.end()) bad(name, "missing");
    return *it;
}

template <typename T>
T get(const json& j, const char* name) {
    const json& v = field(j, name);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        bad(name, e.what());
    }
}

template <typename E, std::size_t N>
E enum_from(const json& j, const char* name, E (&values)[N]) {
    const auto s = get<std::string>(j, name);
    for (E v : values) {
        if (to_string(v) == s) return v;
    }
    bad(name, "unknown value '" + s + "'");
}

void check_version(const json& j) {
    const int v = get<int>(j, "schema_version");
    if (v != kSchemaVersion) bad("schema_version", "unsupported version " + std::to_string(v));
}

}  // namespace

json profile_to_json(const HealthProfile& profile) {
    json conditions = json::array();
    for (std::size_t c = 0; c < kNumConditions; ++c) {
        if (profile.conditions & (1U << c)) conditions.push_back(condition_name(c));
    }
    return {{"age", to_string(profile.age)}, {"sex", to_string(profile.sex)}, {"conditions", conditions}};
}

HealthProfile profile_from_json(const json& j) {
    static AgeBand ages[] = {AgeBand::Child, AgeBand::Adult, AgeBand::Senior};
    static Sex sexes[] = {Sex::Female, Sex::Male};
    HealthProfile p;
    p.age = enum_from(j, "age", ages);
    p.sex = enum_from(j, "sex", sexes);
    const json& conds = field(j, "conditions");
    if (!conds.is_array()) bad("conditions", "not an array");
    for (const auto& c : conds) {
        bool found = false;
        for (std::size_t bit = 0; bit < kNumConditions; ++bit) {
            if (c.is_string() && c.get<std::string>() == condition_name(bit)) {
                p.conditions |= static_cast<std::uint8_t>(1U << bit);
                found = true;
            }
        }
        if (!found) bad("conditions", "unknown condition " + c.dump());
    }
    return p;
}

json slots_to_json(const Observables& obs) {
    json slots = json::array();
    for (std::size_t k = 0; k < obs.slots.size(); ++k) {
        if (!obs.slots[k]) {
            slots.push_back(nullptr);
            continue;
        }
        const DaySlot& s = *obs.slots[k];
        json symptoms = json::array();
        for (std::size_t i = 0; i < kNumSymptoms; ++i) {
            const auto sym = static_cast<Symptom>(i);
            if (s.health.reported_symptoms.contains(sym)) symptoms.push_back(to_string(sym));
        }
        json encounters = json::array();
        for (const auto& c : s.encounters) encounters.push_back({c.level.value(), c.repeats});
        const TestResult& t = s.health.test_result;
        slots.push_back({{"day_offset", k},
                         {"symptoms", symptoms},
                         {"test_result", to_string(t.kind)},
                         {"test_day", t.kind == TestResult::Kind::None ? json(nullptr) : json(t.day)},
                         {"encounters", encounters}});
    }
    return slots;
}

Observables observables_from_json(const json& record) {
    static Symptom symptoms[] = {Symptom::Fever, Symptom::Cough, Symptom::Fatigue, Symptom::Anosmia, Symptom::Other};
    static TestResult::Kind kinds[] = {TestResult::Kind::None, TestResult::Kind::Pending, TestResult::Kind::Positive,
                                       TestResult::Kind::Negative};
    Observables obs;
    obs.day = get<Day>(record, "day");
    obs.profile = profile_from_json(field(record, "profile"));
    const json& slots = field(record, "slots");
    if (!slots.is_array() || slots.empty()) bad("slots", "expected a non-empty array");
    for (std::size_t k = 0; k < slots.size(); ++k) {
        const json& s = slots[k];
        if (s.is_null()) {
            obs.slots.emplace_back(std::nullopt);
            continue;
        }
        if (get<std::size_t>(s, "day_offset") != k) bad("day_offset", "does not match slot position");
        DaySlot slot;
        const json& syms = field(s, "symptoms");
        if (!syms.is_array()) bad("symptoms", "not an array");
        for (const auto& name : syms) {
            json wrapper = {{"symptom", name}};
            slot.health.reported_symptoms.insert(enum_from(wrapper, "symptom", symptoms));
        }
        slot.health.test_result.kind = enum_from(s, "test_result", kinds);
        const json& td = field(s, "test_day");
        if (slot.health.test_result.kind != TestResult::Kind::None) {
            if (!td.is_number_integer()) bad("test_day", "expected an integer");
            slot.health.test_result.day = td.get<Day>();
        }
        const json& enc = field(s, "encounters");
        if (!enc.is_array()) bad("encounters", "not an array");
        for (const auto& pair : enc) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
                !pair[1].is_number_unsigned()) {
                bad("encounters", "expected [level, repeats] pairs");
            }
            const int level = pair[0].get<int>();
            if (level < 0 || level > RiskLevel::kMax) bad("encounters", "risk level out of range");
            slot.encounters.push_back(EncounterCluster{RiskLevel(level), pair[1].get<std::uint32_t>()});
        }
        obs.slots.emplace_back(std::move(slot));
    }
    return obs;
}

json request_to_json(const std::string& run_id, std::uint64_t record_id, const Observables& obs) {
    return {{"schema_version", kSchemaVersion},
            {"run_id", run_id},
            {"record_id", record_id},
            {"day", obs.day},
            {"profile", profile_to_json(obs.profile)},
            {"slots", slots_to_json(obs)}};
}

json record_to_json(const TrainingRecord& r) {
    json j = request_to_json(r.run_id, r.record_id, r.observables);
    j["agent"] = r.agent;
    j["targets"] = r.targets;
    return j;
}

TrainingRecord record_from_json(const json& j) {
    check_version(j);
    TrainingRecord r;
    r.run_id = get<std::string>(j, "run_id");
    r.record_id = get<std::uint64_t>(j, "record_id");
    r.agent = get<std::uint32_t>(j, "agent");
    r.observables = observables_from_json(j);
    r.targets = get<std::vector<double>>(j, "targets");
    if (r.targets.size() != r.observables.slots.size()) bad("targets", "length differs from slots");
    for (double y : r.targets) {
        if (!(y >= 0.0 && y <= 1.0)) bad("targets", "value outside [0, 1]");
    }
    return r;
}

json prediction_to_json(const Prediction& p) {
    return {{"schema_version", kSchemaVersion}, {"run_id", p.run_id}, {"record_id", p.record_id}, {"y_hat", p.y_hat}};
}

Prediction prediction_from_json(const json& j) {
    check_version(j);
    Prediction p;
    p.run_id = get<std::string>(j, "run_id");
    p.record_id = get<std::uint64_t>(j, "record_id");
    p.y_hat = get<std::vector<double>>(j, "y_hat");
    return p;
}

std::vector<json> read_jsonl(std::istream& in) {
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw std::runtime_error("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::vector<json> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return read_jsonl(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_jsonl_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace pct::schema
