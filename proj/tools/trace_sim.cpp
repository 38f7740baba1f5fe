#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pct/config.hpp"
#include "pct/datagen.hpp"
#include "pct/experiments.hpp"
#include "pct/metrics.hpp"
#include "pct/schema.hpp"
#include "pct/simulation.hpp"
#include "pct/trace_io.hpp"

namespace fs = std::filesystem;
using namespace pct;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SimConfig load_base(const std::string& path) {
    SimConfig config;
    if (!path.empty()) {
        if (!fs::is_regular_file(path)) throw UsageError("config file not found: " + path);
        try {
            config = load_config(path);
        } catch (const ConfigError& e) {
            throw UsageError(path + ": " + e.what());
        }
    }
    if (const char* env = std::getenv("TRACE_SIM_SEED"); env && *env) {
        try {
            config.rng_seed = std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("TRACE_SIM_SEED is not an unsigned integer: ") + env);
        }
    }
    return config;
}

// Accepts "3", "1,2,5" and inclusive ranges "1:12".
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const auto& item : items) {
        try {
            if (const auto colon = item.find(':'); colon != std::string::npos) {
                const auto lo = std::stoull(item.substr(0, colon));
                const auto hi = std::stoull(item.substr(colon + 1));
                if (hi < lo) throw UsageError("empty seed range " + item);
                for (auto s = lo; s <= hi; ++s) out.push_back(s);
            } else {
                out.push_back(std::stoull(item));
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad seed '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("no seeds given");
    return out;
}

std::vector<PolicySpec> parse_policies(const std::vector<std::string>& names) {
    if (names.empty()) return default_sweep_policies();
    std::vector<PolicySpec> out;
    for (const auto& n : names) {
        try {
            out.push_back(parse_policy_spec(n));
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

void apply_overrides(SimConfig& config, const std::optional<std::string>& policy,
                     const std::optional<std::string>& predictor) {
    try {
        if (policy) parse_policy_spec(*policy).apply(config);
        if (predictor) config.predictor.kind = parse_predictor(*predictor);
        validate(config);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based epidemic simulator with digital contact tracing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    unsigned jobs = default_jobs();
    std::optional<std::uint64_t> seed;
    std::vector<std::string> seed_items = {"1:12"};
    std::vector<std::string> policy_names;
    std::optional<std::string> policy;
    std::optional<std::string> predictor;
    std::vector<double> scales = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> adoptions = {0.0, 0.30, 0.45, 0.60};
    std::size_t n_runs = 6;
    double target_contacts = 5.61;
    double target_r = 1.2;
    std::string records_path;
    std::string predictions_path;

    auto* run_cmd = app.add_subcommand("run", "Single run: trace.jsonl, events.jsonl, metrics.csv");
    run_cmd->add_option("--config", config_path, "Config file")->required();
    run_cmd->add_option("--seed", seed, "RNG seed (overrides config and TRACE_SIM_SEED)");
    run_cmd->add_option("--out", out, "Output directory")->required();
    run_cmd->add_option("--policy", policy, "NT, BCT, Heuristic, PCT-Oracle, PCT-NoisyOracle, PCT-External");
    run_cmd->add_option("--predictor", predictor, "oracle, noisy_oracle, external");

    auto* pareto_cmd = app.add_subcommand("pareto", "Mobility-scale sweep, one CSV row per (scale, seed, policy)");
    pareto_cmd->add_option("--config", config_path, "Config file")->required();
    pareto_cmd->add_option("--scales", scales, "Mobility scales")->delimiter(',');
    pareto_cmd->add_option("--seeds", seed_items, "Seeds, e.g. 1,2,3 or 1:12")->delimiter(',');
    pareto_cmd->add_option("--policy", policy_names, "Policies (repeatable)")->delimiter(',');
    pareto_cmd->add_option("--out", out, "Output CSV")->required();
    pareto_cmd->add_option("--jobs", jobs, "Parallel runs");

    auto* adoption_cmd = app.add_subcommand("adoption", "Adoption sweep, one CSV row per (policy, adoption, seed)");
    adoption_cmd->add_option("--config", config_path, "Config file")->required();
    adoption_cmd->add_option("--adoptions", adoptions, "Adoption rates")->delimiter(',');
    adoption_cmd->add_option("--seeds", seed_items, "Seeds, e.g. 1,2,3 or 1:12")->delimiter(',');
    adoption_cmd->add_option("--policy", policy_names, "Policies (repeatable)")->delimiter(',');
    adoption_cmd->add_option("--out", out, "Output CSV")->required();
    adoption_cmd->add_option("--jobs", jobs, "Parallel runs");

    auto* datagen_cmd = app.add_subcommand("datagen", "Domain-randomized training data campaign");
    datagen_cmd->add_option("--config", config_path, "Base config file")->required();
    datagen_cmd->add_option("--runs", n_runs, "Number of runs")->check(CLI::PositiveNumber);
    datagen_cmd->add_option("--seed", seed, "Master seed");
    datagen_cmd->add_option("--out", out, "Output directory")->required();
    datagen_cmd->add_option("--jobs", jobs, "Parallel runs");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit mobility scale, transmission rate and risk thresholds");
    calibrate_cmd->add_option("--config", config_path, "Base config file")->required();
    calibrate_cmd->add_option("--target-contacts", target_contacts, "Contacts per agent-day")
        ->check(CLI::PositiveNumber);
    calibrate_cmd->add_option("--target-r", target_r, "Reproduction number")->check(CLI::PositiveNumber);
    calibrate_cmd->add_option("--seeds", seed_items, "Seeds, e.g. 1:8")->delimiter(',');
    calibrate_cmd->add_option("--out", out, "Output directory")->required();
    calibrate_cmd->add_option("--jobs", jobs, "Parallel runs");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "MSE of a predictions file against training records");
    evaluate_cmd->add_option("--records", records_path, "Training records JSONL")->required();
    evaluate_cmd->add_option("--predictions", predictions_path, "Predictions JSONL")->required();

    auto* echo_cmd = app.add_subcommand("echo-targets", "Writes each record's targets as its prediction");
    echo_cmd->add_option("--records", records_path, "Training records or observables JSONL")->required();
    echo_cmd->add_option("--out", out, "Predictions JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    jobs = std::max(1U, jobs);

    try {
        if (*run_cmd) {
            SimConfig config = load_base(config_path);
            if (seed) config.rng_seed = *seed;
            apply_overrides(config, policy, predictor);
            const SimulationTrace trace = pct::run(config);
            write_run_outputs(trace, out);
            std::cout << csv_header() << '\n' << to_csv_row(metrics_row(trace)) << '\n';
        } else if (*pareto_cmd) {
            const SimConfig base = load_base(config_path);
            std::vector<SimConfig> configs;
            try {
                configs = pareto_configs(base, dedup_values(scales, std::cerr, "scale"), parse_seeds(seed_items),
                                         parse_policies(policy_names));
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
            const auto rows = run_rows(configs, jobs);
            auto os = open_out(out);
            write_rows_csv(rows, os);
            std::cout << rows.size() << " rows written to " << out << '\n';
        } else if (*adoption_cmd) {
            const SimConfig base = load_base(config_path);
            std::vector<SimConfig> configs;
            try {
                configs = adoption_configs(base, dedup_values(adoptions, std::cerr, "adoption"),
                                           parse_seeds(seed_items), parse_policies(policy_names));
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
            const auto rows = run_rows(configs, jobs);
            auto os = open_out(out);
            write_rows_csv(rows, os);
            std::cout << rows.size() << " rows written to " << out << '\n';
        } else if (*datagen_cmd) {
            const SimConfig base = load_base(config_path);
            const std::uint64_t master = seed.value_or(base.rng_seed);
            const auto result = run_datagen(base, n_runs, out, master, jobs, std::cerr);
            std::size_t failed = 0;
            for (const auto& r : result.runs) failed += r.ok ? 0 : 1;
            std::cout << result.runs.size() - failed << "/" << result.runs.size() << " runs ok, split "
                      << result.train.size() << "/" << result.valid.size() << ", manifest "
                      << (fs::path(out) / "manifest.json").string() << '\n';
            if (failed == result.runs.size()) return kExitRuntime;
        } else if (*calibrate_cmd) {
            const SimConfig base = load_base(config_path);
            CalibrationTargets targets;
            targets.contacts = target_contacts;
            targets.r = target_r;
            if (calibrate_cmd->count("--seeds")) {
                targets.seeds = parse_seeds(seed_items);
            }
            const CalibrationResult result = calibrate(base, targets, jobs, std::cerr);
            fs::create_directories(out);
            save_thresholds(result.config.thresholds, fs::path(out) / "thresholds.txt");
            {
                auto os = open_out(fs::path(out) / "calibrated.cfg");
                SimConfig c = result.config;
                for (const auto& [k, v] : to_key_values(c)) {
                    if (k == "risk_thresholds") continue;
                    os << k << " = " << v << '\n';
                }
                os << "risk_thresholds_file = thresholds.txt\n";
            }
            {
                auto os = open_out(fs::path(out) / "calibration.csv");
                os << "phase,value,contacts,R\n";
                for (const auto& s : result.steps) os << s.phase << ',' << s.value << ',' << s.contacts << ',' << s.r << '\n';
            }
            std::cout << "mobility_scale=" << result.config.global_mobility_scale
                      << " base_transmission_rate=" << result.config.base_transmission_rate
                      << " contacts=" << result.contacts << " R=" << result.r
                      << " threshold_samples=" << result.threshold_samples << '\n';
            if (!result.contacts_bracketed || !result.r_bracketed) {
                std::cerr << "calibration targets not bracketed\n";
                return kExitRuntime;
            }
        } else if (*evaluate_cmd) {
            std::vector<std::vector<double>> targets;
            std::vector<std::vector<double>> preds;
            std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
            for (const auto& j : schema::read_jsonl_file(records_path)) {
                auto r = schema::record_from_json(j);
                if (!index.emplace(std::pair{r.run_id, r.record_id}, targets.size()).second) {
                    throw std::runtime_error("duplicate record " + r.run_id + "/" + std::to_string(r.record_id));
                }
                targets.push_back(std::move(r.targets));
            }
            preds.resize(targets.size());
            for (const auto& j : schema::read_jsonl_file(predictions_path)) {
                auto p = schema::prediction_from_json(j);
                const auto it = index.find({p.run_id, p.record_id});
                if (it == index.end()) {
                    throw std::runtime_error("prediction for unknown record " + p.run_id + "/" +
                                             std::to_string(p.record_id));
                }
                preds[it->second] = std::move(p.y_hat);
            }
            std::cout << "mse=" << evaluate_predictor(targets, preds) << " records=" << targets.size() << '\n';
        } else if (*echo_cmd) {
            auto os = open_out(out);
            for (const auto& j : schema::read_jsonl_file(records_path)) {
                schema::Prediction p;
                p.run_id = j.at("run_id").get<std::string>();
                p.record_id = j.at("record_id").get<std::uint64_t>();
                if (j.contains("targets")) {
                    p.y_hat = j.at("targets").get<std::vector<double>>();
                } else {
                    p.y_hat.assign(j.at("slots").size(), 0.0);
                }
                schema::write_jsonl_line(os, schema::prediction_to_json(p));
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
