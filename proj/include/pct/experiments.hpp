#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pct/config.hpp"
#include "pct/metrics.hpp"

namespace pct {

/// Runs fn(0..n-1) on up to `jobs` threads. Exceptions are captured per index
/// and returned (null where fn succeeded).
std::vector<std::exception_ptr> run_parallel(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

unsigned default_jobs();

struct PolicySpec {
    Policy policy = Policy::NoTracing;
    PredictorKind predictor = PredictorKind::Oracle;

    std::string label() const;
    void apply(SimConfig& config) const;
};

/// "NT", "BCT", "Heuristic", "PCT-Oracle", "PCT-NoisyOracle", "PCT-External" and lower-case aliases.
PolicySpec parse_policy_spec(const std::string& s);
std::vector<PolicySpec> default_sweep_policies();

/// Runs each config; a failed run yields a row with status "failed" and no R.
std::vector<MetricsRow> run_rows(const std::vector<SimConfig>& configs, unsigned jobs);

/// Configs ordered by (scale, seed, policy).
std::vector<SimConfig> pareto_configs(const SimConfig& base, const std::vector<double>& scales,
                                      const std::vector<std::uint64_t>& seeds, const std::vector<PolicySpec>& policies);

/// Drops repeated entries, keeping first occurrences, and reports each drop to `warn`.
std::vector<double> dedup_values(const std::vector<double>& values, std::ostream& warn, const char* what);

/// Configs ordered by (policy, adoption, seed). Throws ConfigError for an
/// adoption above the smartphone rate.
std::vector<SimConfig> adoption_configs(const SimConfig& base, const std::vector<double>& adoptions,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::vector<PolicySpec>& policies);

void write_rows_csv(const std::vector<MetricsRow>& rows, std::ostream& out);

struct CalibrationStep {
    std::string phase;
    double value = 0.0;
    double contacts = 0.0;
    double r = 0.0;
};

struct CalibrationResult {
    SimConfig config;  // base with the calibrated scale, transmission rate and thresholds
    double contacts = 0.0;
    double r = 0.0;
    bool contacts_bracketed = true;
    bool r_bracketed = true;
    std::size_t threshold_samples = 0;
    std::vector<CalibrationStep> steps;
};

struct CalibrationTargets {
    double contacts = 5.61;
    double r = 1.2;
    double contacts_tolerance = 0.1;
    double r_tolerance = 0.05;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    int max_steps = 40;
};

/// Bisects the mobility scale until mean no-tracing contacts reach the
/// target, then the transmission rate until mean R reaches the target, then
/// fits risk thresholds on oracle predictions at the calibrated point.
CalibrationResult calibrate(const SimConfig& base, const CalibrationTargets& targets, unsigned jobs,
                            std::ostream& log);

struct DatagenRun {
    std::string run_id;
    std::string file;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string records_hash;
    std::size_t records = 0;
    bool ok = false;
    std::string error;
    SimConfig config;
};

struct DatagenResult {
    std::vector<DatagenRun> runs;
    std::vector<std::string> train;
    std::vector<std::string> valid;
};

/// Samples `n_runs` randomized configs from `base`, runs them with observables
/// recorded and writes runs/<id>.jsonl, manifest.json and split.json to `out_dir`.
DatagenResult run_datagen(const SimConfig& base, std::size_t n_runs, const std::filesystem::path& out_dir,
                          std::uint64_t master_seed, unsigned jobs, std::ostream& log);

}  // namespace pct
