#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pct/messaging.hpp"
#include "pct/tracing.hpp"

namespace pct {

enum class Policy : std::uint8_t { NoTracing, BCT, Heuristic, PCT };
enum class PredictorKind : std::uint8_t { Oracle, NoisyOracle, External };

std::string_view to_string(Policy p);
std::string_view to_string(PredictorKind p);
/// Accepts the canonical names plus the short aliases NT/nt, bct, heuristic, pct.
Policy parse_policy(std::string_view s);
PredictorKind parse_predictor(std::string_view s);
/// Short label used in CSV rows: NT, BCT, Heuristic, PCT-Oracle, PCT-NoisyOracle, PCT-External.
std::string policy_label(Policy p, PredictorKind k);

struct PredictorConfig {
    PredictorKind kind = PredictorKind::Oracle;
    double add_sigma = 0.1;
    double mul_sigma = 0.5;
    std::string external_command;
    std::string external_work_dir;

    friend bool operator==(const PredictorConfig&, const PredictorConfig&) = default;
};

/// Raised for configs that violate an invariant. `field()` names the key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Every tunable of a run. Defaults describe the desk-scale reference setup.
struct SimConfig {
    std::uint32_t population_size = 3000;
    std::uint32_t num_days = 50;
    double adoption_rate = 0.6;            // fraction of the whole population with the app
    double smartphone_rate = 0.712;
    double global_mobility_scale = 1.0;
    double initial_exposed_fraction = 0.004;
    double carefulness = 0.65;
    double symptom_dropout = 0.35;
    double symptom_dropin = 0.0005;
    double quarantine_dropout_test = 0.02;
    double quarantine_dropout_household = 0.035;
    double all_levels_dropout = 0.03;
    std::int32_t test_delay_days = 2;
    double test_false_negative_rate = 0.1;
    std::int32_t d_max = 14;
    Policy policy = Policy::NoTracing;
    PredictorConfig predictor;
    std::uint64_t rng_seed = 1;

    // Model constants exposed for sensitivity work.
    double base_transmission_rate = 0.02;
    RecommendationLevel bct_quarantine_level = kQuarantineLevel;
    PsiTable psi = default_psi_table();
    RiskThresholds thresholds = RiskThresholds::equal_width();
    HeuristicLadder heuristic;
    std::int32_t r_window_exclude_days = 14;

    // Trace recording switches.
    bool record_observables = false;
    bool record_encounters = false;
    bool record_predictions = true;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const SimConfig& config);

/// Flat key/value view of a config, keys matching the field names.
std::map<std::string, std::string> to_key_values(const SimConfig& config);

/// Canonical `key = value` text, one key per line, sorted by key.
std::string to_config_text(const SimConfig& config);

/// Applies one key. Throws ConfigError on unknown keys or unparsable values.
/// `base_dir` resolves the relative path of `risk_thresholds_file`.
void apply_key(SimConfig& config, std::string_view key, std::string_view value,
               const std::filesystem::path& base_dir = {});

/// Parses `key = value` lines; `#` starts a comment. Unlisted keys keep
/// their defaults. The result is validated.
SimConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Throws std::runtime_error naming the path when the file cannot be read.
SimConfig load_config(const std::filesystem::path& path);

/// Stable 64-bit FNV-1a hash of the canonical text with the seed excluded,
/// rendered as 16 hex digits.
std::string config_hash(const SimConfig& config);

std::string fnv1a_hex(std::string_view bytes);

/// Reads 15 ascending cut points, whitespace or comma separated.
RiskThresholds load_thresholds(const std::filesystem::path& path);
void save_thresholds(const RiskThresholds& thresholds, const std::filesystem::path& path);

}  // namespace pct
