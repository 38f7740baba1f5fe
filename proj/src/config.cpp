#include "pct/config.hpp"

#include <charconv>
#include <fstream>
#include <cstdio>
#include <sstream>
#include <vector>

namespace pct {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find_first_of(", \t", start);
        const auto piece = s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!piece.empty()) out.push_back(piece);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    value = trim(value);
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw ConfigError(std::string(key), "cannot parse '" + std::string(value) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(std::string(key), "expected true/false, got '" + std::string(value) + "'");
}

RiskThresholds parse_thresholds(std::string_view key, std::string_view value) {
    const auto parts = split_list(value);
    if (parts.size() != RiskThresholds::kCuts) {
        throw ConfigError(std::string(key), "expected 15 cut points, got " + std::to_string(parts.size()));
    }
    RiskThresholds t;
    for (std::size_t i = 0; i < parts.size(); ++i) t.cuts[i] = parse_number<double>(key, parts[i]);
    for (std::size_t i = 1; i < t.cuts.size(); ++i) {
        if (!(t.cuts[i] > t.cuts[i - 1])) throw ConfigError(std::string(key), "cut points must be strictly increasing");
    }
    return t;
}

std::string join_thresholds(const RiskThresholds& t) {
    std::string out;
    for (std::size_t i = 0; i < t.cuts.size(); ++i) {
        if (i) out += ',';
        out += format_double(t.cuts[i]);
    }
    return out;
}

void check_fraction(std::string_view field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(field), "must lie in [0, 1], got " + format_double(v));
    }
}

}  // namespace

std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::NoTracing: return "NoTracing";
        case Policy::BCT: return "BCT";
        case Policy::Heuristic: return "Heuristic";
        case Policy::PCT: return "PCT";
    }
    return "?";
}

std::string_view to_string(PredictorKind p) {
    switch (p) {
        case PredictorKind::Oracle: return "Oracle";
        case PredictorKind::NoisyOracle: return "NoisyOracle";
        case PredictorKind::External: return "External";
    }
    return "?";
}

Policy parse_policy(std::string_view s) {
    if (s == "NoTracing" || s == "NT" || s == "nt" || s == "no_tracing") return Policy::NoTracing;
    if (s == "BCT" || s == "bct") return Policy::BCT;
    if (s == "Heuristic" || s == "heuristic") return Policy::Heuristic;
    if (s == "PCT" || s == "pct") return Policy::PCT;
    throw ConfigError("policy", "unknown policy '" + std::string(s) + "'");
}

std::string policy_label(Policy p, PredictorKind k) {
    switch (p) {
        case Policy::NoTracing: return "NT";
        case Policy::BCT: return "BCT";
        case Policy::Heuristic: return "Heuristic";
        case Policy::PCT: break;
    }
    return "PCT-" + std::string(to_string(k));
}

PredictorKind parse_predictor(std::string_view s) {
    if (s == "Oracle" || s == "oracle") return PredictorKind::Oracle;
    if (s == "NoisyOracle" || s == "noisy_oracle" || s == "noisyoracle" || s == "noisy") return PredictorKind::NoisyOracle;
    if (s == "External" || s == "external") return PredictorKind::External;
    throw ConfigError("predictor", "unknown predictor '" + std::string(s) + "'");
}

void validate(const SimConfig& c) {
    if (c.population_size < 2) throw ConfigError("population_size", "must be at least 2");
    check_fraction("adoption_rate", c.adoption_rate);
    check_fraction("smartphone_rate", c.smartphone_rate);
    check_fraction("initial_exposed_fraction", c.initial_exposed_fraction);
    check_fraction("carefulness", c.carefulness);
    check_fraction("symptom_dropout", c.symptom_dropout);
    check_fraction("symptom_dropin", c.symptom_dropin);
    check_fraction("quarantine_dropout_test", c.quarantine_dropout_test);
    check_fraction("quarantine_dropout_household", c.quarantine_dropout_household);
    check_fraction("all_levels_dropout", c.all_levels_dropout);
    check_fraction("test_false_negative_rate", c.test_false_negative_rate);
    check_fraction("base_transmission_rate", c.base_transmission_rate);
    if (c.adoption_rate > c.smartphone_rate) {
        throw ConfigError("adoption_rate", "exceeds smartphone_rate (" + format_double(c.adoption_rate) + " > " +
                                               format_double(c.smartphone_rate) + ")");
    }
    if (!(c.global_mobility_scale >= 0.0)) throw ConfigError("global_mobility_scale", "must be non-negative");
    if (c.test_delay_days < 0) throw ConfigError("test_delay_days", "must be non-negative");
    if (c.d_max < 1 || c.d_max > 15) throw ConfigError("d_max", "must lie in 1..15 (4-bit day offset)");
    if (c.predictor.add_sigma < 0.0) throw ConfigError("oracle_add_sigma", "must be non-negative");
    if (c.predictor.mul_sigma < 0.0) throw ConfigError("oracle_mul_sigma", "must be non-negative");
    if (c.policy == Policy::PCT && c.predictor.kind == PredictorKind::External &&
        c.predictor.external_command.empty()) {
        throw ConfigError("external_predictor_cmd", "required for the External predictor");
    }
    if (c.bct_quarantine_level < 0 || c.bct_quarantine_level > kQuarantineLevel) {
        throw ConfigError("bct_quarantine_level", "must lie in 0..4");
    }
    for (const auto level : c.psi) {
        if (level < 0 || level > kQuarantineLevel) throw ConfigError("psi", "levels must lie in 0..4");
    }
    if (c.r_window_exclude_days < 0) throw ConfigError("r_window_exclude_days", "must be non-negative");
}

std::map<std::string, std::string> to_key_values(const SimConfig& c) {
    std::map<std::string, std::string> kv;
    kv["population_size"] = std::to_string(c.population_size);
    kv["num_days"] = std::to_string(c.num_days);
    kv["adoption_rate"] = format_double(c.adoption_rate);
    kv["smartphone_rate"] = format_double(c.smartphone_rate);
    kv["global_mobility_scale"] = format_double(c.global_mobility_scale);
    kv["initial_exposed_fraction"] = format_double(c.initial_exposed_fraction);
    kv["carefulness"] = format_double(c.carefulness);
    kv["symptom_dropout"] = format_double(c.symptom_dropout);
    kv["symptom_dropin"] = format_double(c.symptom_dropin);
    kv["quarantine_dropout_test"] = format_double(c.quarantine_dropout_test);
    kv["quarantine_dropout_household"] = format_double(c.quarantine_dropout_household);
    kv["all_levels_dropout"] = format_double(c.all_levels_dropout);
    kv["test_delay_days"] = std::to_string(c.test_delay_days);
    kv["test_false_negative_rate"] = format_double(c.test_false_negative_rate);
    kv["d_max"] = std::to_string(c.d_max);
    kv["policy"] = std::string(to_string(c.policy));
    kv["predictor"] = std::string(to_string(c.predictor.kind));
    kv["oracle_add_sigma"] = format_double(c.predictor.add_sigma);
    kv["oracle_mul_sigma"] = format_double(c.predictor.mul_sigma);
    kv["external_predictor_cmd"] = c.predictor.external_command;
    kv["external_predictor_dir"] = c.predictor.external_work_dir;
    kv["rng_seed"] = std::to_string(c.rng_seed);
    kv["base_transmission_rate"] = format_double(c.base_transmission_rate);
    kv["bct_quarantine_level"] = std::to_string(c.bct_quarantine_level);
    std::string psi;
    for (std::size_t i = 0; i < c.psi.size(); ++i) {
        if (i) psi += ',';
        psi += std::to_string(c.psi[i]);
    }
    kv["psi"] = psi;
    kv["risk_thresholds"] = join_thresholds(c.thresholds);
    kv["heuristic.symptoms_for_high"] = std::to_string(c.heuristic.symptoms_for_high);
    kv["heuristic.risk_for_high"] = std::to_string(c.heuristic.risk_for_high);
    kv["heuristic.risk_for_medium"] = std::to_string(c.heuristic.risk_for_medium);
    kv["heuristic.risk_for_low"] = std::to_string(c.heuristic.risk_for_low);
    kv["heuristic.positive_y"] = format_double(c.heuristic.positive_y);
    kv["heuristic.symptom_y"] = format_double(c.heuristic.symptom_y);
    kv["heuristic.max_symptom_y"] = format_double(c.heuristic.max_symptom_y);
    kv["heuristic.risk_y"] = format_double(c.heuristic.risk_y);
    kv["heuristic.negative_test_factor"] = format_double(c.heuristic.negative_test_factor);
    kv["r_window_exclude_days"] = std::to_string(c.r_window_exclude_days);
    kv["record_observables"] = c.record_observables ? "true" : "false";
    kv["record_encounters"] = c.record_encounters ? "true" : "false";
    kv["record_predictions"] = c.record_predictions ? "true" : "false";
    return kv;
}

std::string to_config_text(const SimConfig& c) {
    std::string out;
    for (const auto& [k, v] : to_key_values(c)) out += k + " = " + v + "\n";
    return out;
}

void apply_key(SimConfig& c, std::string_view key, std::string_view value,
               const std::filesystem::path& base_dir) {
    const auto num = [key](auto& field) {
        return [key, &field](std::string_view v) {
            field = parse_number<std::remove_reference_t<decltype(field)>>(key, v);
        };
    };
    const std::string k(key);
    value = trim(value);

    if (k == "population_size") return num(c.population_size)(value);
    if (k == "num_days") return num(c.num_days)(value);
    if (k == "adoption_rate") return num(c.adoption_rate)(value);
    if (k == "smartphone_rate") return num(c.smartphone_rate)(value);
    if (k == "global_mobility_scale") return num(c.global_mobility_scale)(value);
    if (k == "initial_exposed_fraction") return num(c.initial_exposed_fraction)(value);
    if (k == "carefulness") return num(c.carefulness)(value);
    if (k == "symptom_dropout") return num(c.symptom_dropout)(value);
    if (k == "symptom_dropin") return num(c.symptom_dropin)(value);
    if (k == "quarantine_dropout_test") return num(c.quarantine_dropout_test)(value);
    if (k == "quarantine_dropout_household") return num(c.quarantine_dropout_household)(value);
    if (k == "all_levels_dropout") return num(c.all_levels_dropout)(value);
    if (k == "test_delay_days") return num(c.test_delay_days)(value);
    if (k == "test_false_negative_rate") return num(c.test_false_negative_rate)(value);
    if (k == "d_max") return num(c.d_max)(value);
    if (k == "rng_seed") return num(c.rng_seed)(value);
    if (k == "policy") {
        c.policy = parse_policy(value);
        return;
    }
    if (k == "predictor") {
        c.predictor.kind = parse_predictor(value);
        return;
    }
    if (k == "oracle_add_sigma") return num(c.predictor.add_sigma)(value);
    if (k == "oracle_mul_sigma") return num(c.predictor.mul_sigma)(value);
    if (k == "external_predictor_cmd") {
        c.predictor.external_command = std::string(value);
        return;
    }
    if (k == "external_predictor_dir") {
        c.predictor.external_work_dir = std::string(value);
        return;
    }
    if (k == "base_transmission_rate") return num(c.base_transmission_rate)(value);
    if (k == "bct_quarantine_level") return num(c.bct_quarantine_level)(value);
    if (k == "psi") {
        const auto parts = split_list(value);
        if (parts.size() != c.psi.size()) throw ConfigError(k, "expected 16 recommendation levels");
        for (std::size_t i = 0; i < parts.size(); ++i) c.psi[i] = parse_number<int>(key, parts[i]);
        return;
    }
    if (k == "risk_thresholds") {
        c.thresholds = parse_thresholds(key, value);
        return;
    }
    if (k == "risk_thresholds_file") {
        std::filesystem::path p{std::string(value)};
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        try {
            c.thresholds = load_thresholds(p);
        } catch (const std::exception& e) {
            throw ConfigError(k, e.what());
        }
        return;
    }
    if (k == "heuristic.symptoms_for_high") return num(c.heuristic.symptoms_for_high)(value);
    if (k == "heuristic.risk_for_high") return num(c.heuristic.risk_for_high)(value);
    if (k == "heuristic.risk_for_medium") return num(c.heuristic.risk_for_medium)(value);
    if (k == "heuristic.risk_for_low") return num(c.heuristic.risk_for_low)(value);
    if (k == "heuristic.positive_y") return num(c.heuristic.positive_y)(value);
    if (k == "heuristic.symptom_y") return num(c.heuristic.symptom_y)(value);
    if (k == "heuristic.max_symptom_y") return num(c.heuristic.max_symptom_y)(value);
    if (k == "heuristic.risk_y") return num(c.heuristic.risk_y)(value);
    if (k == "heuristic.negative_test_factor") return num(c.heuristic.negative_test_factor)(value);
    if (k == "r_window_exclude_days") return num(c.r_window_exclude_days)(value);
    if (k == "record_observables") {
        c.record_observables = parse_bool(key, value);
        return;
    }
    if (k == "record_encounters") {
        c.record_encounters = parse_bool(key, value);
        return;
    }
    if (k == "record_predictions") {
        c.record_predictions = parse_bool(key, value);
        return;
    }
    throw ConfigError(k, "unknown config key");
}

SimConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    SimConfig c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
            }
            apply_key(c, trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    validate(c);
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const SimConfig& c) {
    auto kv = to_key_values(c);
    kv.erase("rng_seed");
    std::string text;
    for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
    return fnv1a_hex(text);
}

RiskThresholds load_thresholds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read thresholds file '" + path.string() + "'");
    std::string text;
    for (std::string line; std::getline(in, line);) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        text += line + " ";
    }
    return parse_thresholds("risk_thresholds", trim(text));
}

void save_thresholds(const RiskThresholds& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << "# 15 ascending cut points; risk level = number of cut points strictly below the value\n";
    for (const double cut : t.cuts) out << format_double(cut) << "\n";
    if (!out) throw std::runtime_error("cannot write thresholds file '" + path.string() + "'");
}

}  // namespace pct
