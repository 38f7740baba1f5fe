#include "pct/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pct/datagen.hpp"

namespace pct {

std::vector<std::exception_ptr> run_parallel(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (threads <= 1) {
        worker();
        return errors;
    }
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return errors;
}

unsigned default_jobs() { return std::max(1U, std::thread::hardware_concurrency()); }

std::string PolicySpec::label() const { return policy_label(policy, predictor); }

void PolicySpec::apply(SimConfig& config) const {
    config.policy = policy;
    if (policy == Policy::PCT) config.predictor.kind = predictor;
}

PolicySpec parse_policy_spec(const std::string& s) {
    std::string lower;
    std::transform(s.begin(), s.end(), std::back_inserter(lower), [](unsigned char c) { return std::tolower(c); });
    if (lower.starts_with("pct-") || lower.starts_with("pct_")) {
        return {Policy::PCT, parse_predictor(lower.substr(4))};
    }
    if (lower == "pct") return {Policy::PCT, PredictorKind::Oracle};
    return {parse_policy(s), PredictorKind::Oracle};
}

std::vector<PolicySpec> default_sweep_policies() {
    return {{Policy::NoTracing, PredictorKind::Oracle},
            {Policy::BCT, PredictorKind::Oracle},
            {Policy::Heuristic, PredictorKind::Oracle},
            {Policy::PCT, PredictorKind::Oracle}};
}

std::vector<MetricsRow> run_rows(const std::vector<SimConfig>& configs, unsigned jobs) {
    std::vector<MetricsRow> rows(configs.size());
    const auto errors = run_parallel(configs.size(), jobs, [&](std::size_t i) {
        SimConfig c = configs[i];
        c.record_predictions = false;
        rows[i] = metrics_row(run(c));
    });
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!errors[i]) continue;
        MetricsRow& row = rows[i];
        const SimConfig& c = configs[i];
        row = MetricsRow{};
        row.config_hash = config_hash(c);
        row.seed = c.rng_seed;
        row.policy = policy_label(c.policy, c.predictor.kind);
        row.adoption = c.adoption_rate;
        row.mobility_scale = c.global_mobility_scale;
        row.status = "failed";
    }
    return rows;
}

std::vector<SimConfig> pareto_configs(const SimConfig& base, const std::vector<double>& scales,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::vector<PolicySpec>& policies) {
    std::vector<SimConfig> out;
    for (double scale : scales) {
        for (std::uint64_t seed : seeds) {
            for (const auto& p : policies) {
                SimConfig c = base;
                c.global_mobility_scale = scale;
                c.rng_seed = seed;
                p.apply(c);
                validate(c);
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

std::vector<double> dedup_values(const std::vector<double>& values, std::ostream& warn, const char* what) {
    std::vector<double> out;
    for (double v : values) {
        if (std::find(out.begin(), out.end(), v) != out.end()) {
            warn << "warning: duplicate " << what << " " << v << " ignored\n";
            continue;
        }
        out.push_back(v);
    }
    return out;
}

std::vector<SimConfig> adoption_configs(const SimConfig& base, const std::vector<double>& adoptions,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::vector<PolicySpec>& policies) {
    std::vector<SimConfig> out;
    for (const auto& p : policies) {
        for (double adoption : adoptions) {
            if (adoption < 0.0 || adoption > base.smartphone_rate) {
                throw ConfigError("adoption_rate", "adoption " + std::to_string(adoption) +
                                                       " outside [0, smartphone_rate]");
            }
            for (std::uint64_t seed : seeds) {
                SimConfig c = base;
                c.adoption_rate = adoption;
                c.rng_seed = seed;
                p.apply(c);
                validate(c);
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

void write_rows_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
    out << csv_header() << '\n';
    for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

namespace {

struct Probe {
    double contacts = 0.0;
    double r = 0.0;
};

Probe probe(const SimConfig& base, const std::vector<std::uint64_t>& seeds, unsigned jobs) {
    std::vector<SimConfig> configs;
    for (std::uint64_t s : seeds) {
        SimConfig c = base;
        c.rng_seed = s;
        c.policy = Policy::NoTracing;
        configs.push_back(std::move(c));
    }
    const auto rows = run_rows(configs, jobs);
    Probe p;
    std::size_t defined = 0;
    for (const auto& row : rows) {
        if (row.status != "ok") throw std::runtime_error("calibration run failed for seed " + std::to_string(row.seed));
        p.contacts += row.contacts;
        if (row.r) {
            p.r += *row.r;
            ++defined;
        }
    }
    p.contacts /= static_cast<double>(rows.size());
    p.r = defined ? p.r / static_cast<double>(defined) : 0.0;
    return p;
}

// Bisection for an increasing response; expands `hi` up to `hi_limit` when needed.
template <typename Eval>
double bisect(double lo, double hi, double hi_limit, double target, double tol, int max_steps, Eval eval,
              bool& bracketed, double& achieved) {
    double f_hi = eval(hi);
    while (f_hi < target && hi < hi_limit) {
        lo = hi;
        hi = std::min(hi * 2.0, hi_limit);
        f_hi = eval(hi);
    }
    if (f_hi < target) {
        bracketed = false;
        achieved = f_hi;
        return hi;
    }
    double best = hi;
    achieved = f_hi;
    for (int step = 0; step < max_steps; ++step) {
        if (std::abs(achieved - target) <= tol) break;
        const double mid = 0.5 * (lo + hi);
        const double f = eval(mid);
        if (std::abs(f - target) < std::abs(achieved - target)) {
            best = mid;
            achieved = f;
        }
        if (f < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

}  // namespace

CalibrationResult calibrate(const SimConfig& base, const CalibrationTargets& targets, unsigned jobs,
                            std::ostream& log) {
    if (targets.contacts <= 0.0 || targets.r <= 0.0) throw std::invalid_argument("calibration targets must be > 0");
    CalibrationResult result;
    SimConfig c = base;
    c.record_predictions = false;

    const auto eval_scale = [&](double scale) {
        c.global_mobility_scale = scale;
        const Probe p = probe(c, targets.seeds, jobs);
        result.steps.push_back({"mobility_scale", scale, p.contacts, p.r});
        log << "mobility_scale=" << scale << " contacts=" << p.contacts << " R=" << p.r << '\n';
        return p.contacts;
    };
    double contacts = 0.0;
    const double scale = bisect(0.0, 1.0, 16.0, targets.contacts, targets.contacts_tolerance, targets.max_steps,
                                eval_scale, result.contacts_bracketed, contacts);
    c.global_mobility_scale = scale;
    if (!result.contacts_bracketed) {
        log << "contacts target not bracketed: reached " << contacts << " at scale " << scale << '\n';
    }

    const auto eval_rate = [&](double rate) {
        c.base_transmission_rate = rate;
        const Probe p = probe(c, targets.seeds, jobs);
        result.steps.push_back({"base_transmission_rate", rate, p.contacts, p.r});
        log << "base_transmission_rate=" << rate << " contacts=" << p.contacts << " R=" << p.r << '\n';
        return p.r;
    };
    double r = 0.0;
    const double rate = bisect(0.0, std::max(base.base_transmission_rate, 1e-3), 1.0, targets.r, targets.r_tolerance,
                               targets.max_steps, eval_rate, result.r_bracketed, r);
    c.base_transmission_rate = rate;
    if (!result.r_bracketed) log << "R target not bracketed: reached " << r << " at rate " << rate << '\n';

    const Probe final_probe = probe(c, targets.seeds, jobs);
    result.contacts = final_probe.contacts;
    result.r = final_probe.r;

    // Threshold fit on today's oracle predictions at the calibrated point.
    std::vector<std::vector<double>> per_seed(targets.seeds.size());
    const auto errors = run_parallel(targets.seeds.size(), jobs, [&](std::size_t i) {
        SimConfig pc = c;
        pc.rng_seed = targets.seeds[i];
        pc.policy = Policy::PCT;
        pc.predictor.kind = PredictorKind::Oracle;
        pc.record_predictions = true;
        const SimulationTrace t = run(pc);
        for (const auto& p : t.predictions) {
            if (p.y_hat.front() > 0.0) per_seed[i].push_back(p.y_hat.front());
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<double> samples;
    for (const auto& s : per_seed) samples.insert(samples.end(), s.begin(), s.end());
    result.threshold_samples = samples.size();
    c.thresholds = calibrate_thresholds(samples);
    log << "thresholds fitted on " << samples.size() << " samples\n";

    c.record_predictions = base.record_predictions;
    result.config = c;
    return result;
}

namespace {

void run_one_datagen(DatagenRun& run_info, const std::filesystem::path& path) {
    World world(run_info.config);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::uint64_t record_id = 0;
    SimulationTrace chunk;
    for (std::uint32_t d = 0; d < run_info.config.num_days; ++d) {
        world.step_day();
        world.collect_records(chunk);
        for (auto& o : chunk.observations) {
            schema::TrainingRecord rec{run_info.run_id, record_id++, o.agent, std::move(o.observables),
                                       std::move(o.targets)};
            schema::write_jsonl_line(out, schema::record_to_json(rec));
        }
    }
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
    const std::size_t expected = static_cast<std::size_t>(world.app_users()) * run_info.config.num_days;
    if (record_id != expected) {
        throw std::runtime_error("expected " + std::to_string(expected) + " records, wrote " +
                                 std::to_string(record_id));
    }
    run_info.records = record_id;
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    run_info.records_hash = fnv1a_hex(bytes);
}

}  // namespace

DatagenResult run_datagen(const SimConfig& base, std::size_t n_runs, const std::filesystem::path& out_dir,
                          std::uint64_t master_seed, unsigned jobs, std::ostream& log) {
    namespace fs = std::filesystem;
    if (n_runs == 0) throw std::invalid_argument("n_runs must be >= 1");
    fs::create_directories(out_dir / "runs");

    DatagenResult result;
    Rng dr_rng(master_seed, Stream::DomainRandomization);
    for (std::size_t i = 0; i < n_runs; ++i) {
        DatagenRun r;
        char id[32];
        std::snprintf(id, sizeof id, "run_%04zu", i);
        r.run_id = id;
        r.file = "runs/" + r.run_id + ".jsonl";
        r.config = sample_dr_config(base, dr_rng);
        r.seed = derive_seed(master_seed, i + 1);
        r.config.rng_seed = r.seed;
        r.config.policy = Policy::PCT;
        if (r.config.predictor.kind != PredictorKind::External) r.config.predictor.kind = PredictorKind::NoisyOracle;
        r.config.record_observables = true;
        r.config.record_predictions = false;
        r.config_hash = config_hash(r.config);
        result.runs.push_back(std::move(r));
    }

    std::mutex log_mutex;
    const auto errors = run_parallel(n_runs, jobs, [&](std::size_t i) {
        run_one_datagen(result.runs[i], out_dir / result.runs[i].file);
        std::lock_guard lock(log_mutex);
        log << result.runs[i].run_id << ": " << result.runs[i].records << " records\n";
    });
    std::vector<std::string> ok_ids;
    for (std::size_t i = 0; i < n_runs; ++i) {
        DatagenRun& r = result.runs[i];
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                r.error = e.what();
            } catch (...) {
                r.error = "unknown error";
            }
            log << r.run_id << " failed: " << r.error << '\n';
            continue;
        }
        r.ok = true;
        ok_ids.push_back(r.run_id);
    }
    if (ok_ids.size() >= 2) {
        std::tie(result.train, result.valid) = make_split(ok_ids, kDefaultTrainFraction, master_seed);
    } else {
        result.train = ok_ids;
    }

    using nlohmann::json;
    json runs = json::array();
    for (const auto& r : result.runs) {
        json params;
        for (const auto& [k, v] : to_key_values(r.config)) params[k] = v;
        runs.push_back({{"run_id", r.run_id},
                        {"file", r.file},
                        {"seed", r.seed},
                        {"config_hash", r.config_hash},
                        {"status", r.ok ? "ok" : "failed"},
                        {"error", r.error},
                        {"records", r.records},
                        {"records_hash", r.records_hash},
                        {"config", params}});
    }
    const json split = {{"train", result.train}, {"valid", result.valid}, {"train_fraction", kDefaultTrainFraction}};
    const json manifest = {{"schema_version", schema::kSchemaVersion},
                           {"master_seed", master_seed},
                           {"n_runs", n_runs},
                           {"runs", runs},
                           {"split", split}};
    const auto write = [](const fs::path& p, const json& j) {
        std::ofstream os(p);
        os << j.dump(2) << '\n';
        if (!os) throw std::runtime_error("cannot write " + p.string());
    };
    write(out_dir / "manifest.json", manifest);
    write(out_dir / "split.json", split);
    return result;
}

}  // namespace pct
