#include "pct/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pct {

SimConfig sample_dr_config(const SimConfig& base, Rng& rng, const DrRanges& r) {
    SimConfig c = base;
    const auto draw = [&rng](const Range& range) { return rng.uniform(range.lo, range.hi); };
    c.adoption_rate = draw(r.adoption);
    c.carefulness = draw(r.carefulness);
    c.initial_exposed_fraction = draw(r.initial_exposed);
    c.predictor.add_sigma = draw(r.oracle_add_sigma);
    c.predictor.mul_sigma = draw(r.oracle_mul_sigma);
    c.global_mobility_scale = draw(r.mobility_scale);
    c.symptom_dropout = draw(r.symptom_dropout);
    c.symptom_dropin = draw(r.symptom_dropin);
    c.quarantine_dropout_test = draw(r.quarantine_dropout_test);
    c.quarantine_dropout_household = draw(r.quarantine_dropout_household);
    c.all_levels_dropout = draw(r.all_levels_dropout);
    return c;
}

std::vector<std::string> dr_range_violations(const SimConfig& c, const DrRanges& r) {
    std::vector<std::string> out;
    const auto check = [&out](const char* name, double v, const Range& range) {
        if (!range.contains(v)) {
            out.push_back(std::string(name) + "=" + std::to_string(v) + " outside [" + std::to_string(range.lo) +
                          ", " + std::to_string(range.hi) + "]");
        }
    };
    check("adoption_rate", c.adoption_rate, r.adoption);
    check("carefulness", c.carefulness, r.carefulness);
    check("initial_exposed_fraction", c.initial_exposed_fraction, r.initial_exposed);
    check("oracle_add_sigma", c.predictor.add_sigma, r.oracle_add_sigma);
    check("oracle_mul_sigma", c.predictor.mul_sigma, r.oracle_mul_sigma);
    check("global_mobility_scale", c.global_mobility_scale, r.mobility_scale);
    check("symptom_dropout", c.symptom_dropout, r.symptom_dropout);
    check("symptom_dropin", c.symptom_dropin, r.symptom_dropin);
    check("quarantine_dropout_test", c.quarantine_dropout_test, r.quarantine_dropout_test);
    check("quarantine_dropout_household", c.quarantine_dropout_household, r.quarantine_dropout_household);
    check("all_levels_dropout", c.all_levels_dropout, r.all_levels_dropout);
    return out;
}

double adoption_to_uptake(double adoption, double smartphone_rate) {
    if (adoption < 0.0 || smartphone_rate <= 0.0 || adoption > smartphone_rate) {
        throw std::invalid_argument("adoption " + std::to_string(adoption) + " exceeds smartphone rate " +
                                    std::to_string(smartphone_rate));
    }
    return adoption / smartphone_rate;
}

namespace {

void check_exportable(const SimulationTrace& trace) {
    if (!trace.config.record_observables) {
        throw std::invalid_argument("trace was recorded without observables");
    }
    const std::size_t expected = static_cast<std::size_t>(trace.app_users) * trace.simulated_days();
    if (trace.simulated_days() != trace.config.num_days || trace.observations.size() != expected) {
        throw std::invalid_argument("truncated trace: " + std::to_string(trace.observations.size()) +
                                    " observations, expected " + std::to_string(expected));
    }
}

schema::TrainingRecord to_record(const ObservationRecord& o, const std::string& run_id, std::uint64_t id) {
    return schema::TrainingRecord{run_id, id, o.agent, o.observables, o.targets};
}

}  // namespace

std::vector<schema::TrainingRecord> export_training_records(const SimulationTrace& trace, const std::string& run_id) {
    check_exportable(trace);
    std::vector<schema::TrainingRecord> out;
    out.reserve(trace.observations.size());
    for (std::size_t i = 0; i < trace.observations.size(); ++i) out.push_back(to_record(trace.observations[i], run_id, i));
    return out;
}

std::size_t write_training_records(const SimulationTrace& trace, const std::string& run_id, std::ostream& out) {
    check_exportable(trace);
    for (std::size_t i = 0; i < trace.observations.size(); ++i) {
        schema::write_jsonl_line(out, schema::record_to_json(to_record(trace.observations[i], run_id, i)));
    }
    return trace.observations.size();
}

std::pair<std::vector<std::string>, std::vector<std::string>> make_split(std::vector<std::string> runs,
                                                                         double train_fraction, std::uint64_t seed) {
    if (runs.size() < 2) throw std::invalid_argument("a split needs at least 2 runs");
    std::sort(runs.begin(), runs.end());
    runs.erase(std::unique(runs.begin(), runs.end()), runs.end());
    if (runs.size() < 2) throw std::invalid_argument("a split needs at least 2 distinct runs");
    Rng rng(seed, Stream::Split);
    std::shuffle(runs.begin(), runs.end(), rng.engine());
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(runs.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, runs.size() - 1);
    std::vector<std::string> train(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::string> valid(runs.begin() + static_cast<std::ptrdiff_t>(n_train), runs.end());
    std::sort(train.begin(), train.end());
    std::sort(valid.begin(), valid.end());
    return {train, valid};
}

}  // namespace pct
