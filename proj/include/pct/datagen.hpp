#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pct/config.hpp"
#include "pct/rng.hpp"
#include "pct/schema.hpp"
#include "pct/simulation.hpp"

namespace pct {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Domain-randomization ranges. Unlisted fields come from the base config.
struct DrRanges {
    Range adoption{0.30, 0.60};
    Range carefulness{0.5, 0.8};
    Range initial_exposed{0.002, 0.006};
    Range oracle_add_sigma{0.05, 0.15};
    Range oracle_mul_sigma{0.2, 0.8};
    Range mobility_scale{0.3, 0.9};
    Range symptom_dropout{0.1, 0.6};
    Range symptom_dropin{0.0001, 0.001};
    Range quarantine_dropout_test{0.01, 0.03};
    Range quarantine_dropout_household{0.02, 0.05};
    Range all_levels_dropout{0.01, 0.05};
};

/// Independent uniform draw of every randomized field.
SimConfig sample_dr_config(const SimConfig& base, Rng& rng, const DrRanges& ranges = {});

/// Lists every (field, value, range) triple of a sampled config that falls outside `ranges`.
std::vector<std::string> dr_range_violations(const SimConfig& config, const DrRanges& ranges = {});

/// Fraction of smartphone owners with the app. Throws std::invalid_argument
/// when adoption exceeds the smartphone rate.
double adoption_to_uptake(double adoption, double smartphone_rate);

/// Converts a trace recorded with observables into training records, one per
/// app user and simulated day. Throws std::invalid_argument on truncated traces.
std::vector<schema::TrainingRecord> export_training_records(const SimulationTrace& trace, const std::string& run_id);

/// Streams the records of `trace` to `out` as JSONL; returns the record count.
std::size_t write_training_records(const SimulationTrace& trace, const std::string& run_id, std::ostream& out);

/// Seeded split of whole runs. The train side receives round(n * fraction)
/// runs, clamped so both sides are non-empty.
std::pair<std::vector<std::string>, std::vector<std::string>> make_split(std::vector<std::string> runs,
                                                                         double train_fraction, std::uint64_t seed);

inline constexpr double kDefaultTrainFraction = 200.0 / 240.0;

}  // namespace pct
