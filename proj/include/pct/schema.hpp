#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pct/tracing.hpp"

namespace pct::schema {

/// Version stamped on every record, observables request and prediction.
inline constexpr int kSchemaVersion = 1;

nlohmann::json profile_to_json(const HealthProfile& profile);
HealthProfile profile_from_json(const nlohmann::json& j);

/// `[slot_0, ..., slot_dmax]`, each slot either null or
/// {"day_offset", "symptoms", "test_result", "test_day", "encounters": [[level, repeats], ...]}.
nlohmann::json slots_to_json(const Observables& obs);
Observables observables_from_json(const nlohmann::json& record);

/// Training record: observables plus ground-truth targets.
struct TrainingRecord {
    std::string run_id;
    std::uint64_t record_id = 0;
    std::uint32_t agent = 0;  // own per-run index, never a partner's
    Observables observables;
    std::vector<double> targets;
};

nlohmann::json record_to_json(const TrainingRecord& r);
/// Throws std::runtime_error naming the offending field when the record is malformed.
TrainingRecord record_from_json(const nlohmann::json& j);

/// Observables request sent to an external predictor (a record without targets).
nlohmann::json request_to_json(const std::string& run_id, std::uint64_t record_id, const Observables& obs);

struct Prediction {
    std::string run_id;
    std::uint64_t record_id = 0;
    std::vector<double> y_hat;
};

nlohmann::json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);

/// Reads one JSON value per non-empty line. Throws std::runtime_error with the line number on parse errors.
std::vector<nlohmann::json> read_jsonl(std::istream& in);
std::vector<nlohmann::json> read_jsonl_file(const std::string& path);
void write_jsonl_line(std::ostream& out, const nlohmann::json& j);

}  // namespace pct::schema
