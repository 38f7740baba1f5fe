#include "pct/metrics.hpp"

#include <charconv>
#include <sstream>
#include <unordered_map>

namespace pct {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

std::optional<double> estimate_r(std::span<const InfectionEvent> events, std::span<const EpiState> states,
                                 DayWindow window) {
    std::unordered_map<AgentId, const InfectionEvent*> by_infectee;
    by_infectee.reserve(events.size());
    for (const auto& e : events) {
        if (e.infectee == e.infector) throw MalformedEventLog("agent " + std::to_string(e.infectee) + " infects itself");
        if (!by_infectee.emplace(e.infectee, &e).second) {
            throw MalformedEventLog("agent " + std::to_string(e.infectee) + " has more than one parent");
        }
        if (e.infectee >= states.size()) throw MalformedEventLog("infectee outside the population");
    }
    // Walk each ancestry chain; a chain longer than the log means a cycle.
    for (const auto& e : events) {
        const InfectionEvent* cur = &e;
        std::size_t steps = 0;
        while (!cur->is_seed()) {
            const auto it = by_infectee.find(cur->infector);
            if (it == by_infectee.end()) {
                throw MalformedEventLog("infector " + std::to_string(cur->infector) + " was never infected");
            }
            cur = it->second;
            if (++steps > events.size()) throw MalformedEventLog("infection log contains a cycle");
        }
    }

    std::unordered_map<AgentId, std::uint64_t> children;
    std::uint64_t parents = 0;
    for (const auto& e : events) {
        if (e.is_seed() || !window.contains(e.day) || states[e.infectee] != EpiState::Recovered) continue;
        children.emplace(e.infectee, 0);
        ++parents;
    }
    std::uint64_t offspring = 0;
    for (const auto& e : events) {
        if (e.is_seed()) continue;
        if (children.contains(e.infector)) ++offspring;
    }
    if (parents == 0) return std::nullopt;
    return static_cast<double>(offspring) / static_cast<double>(parents);
}

DayWindow default_r_window(const SimulationTrace& trace) {
    return {1, static_cast<Day>(trace.simulated_days()) - trace.config.r_window_exclude_days};
}

std::optional<double> estimate_r(const SimulationTrace& trace) {
    return estimate_r(trace.events, trace.final_states, default_r_window(trace));
}

double false_quarantine_fraction(const SimulationTrace& trace, Day first, Day last) {
    first = std::max<Day>(first, 1);
    last = std::min<Day>(last, static_cast<Day>(trace.simulated_days()));
    if (last < first || trace.population() == 0) return 0.0;
    std::uint64_t healthy = 0;
    for (Day d = first; d <= last; ++d) healthy += trace.days[static_cast<std::size_t>(d)].quarantined_healthy;
    const double agent_days = static_cast<double>(trace.population()) * static_cast<double>(last - first + 1);
    return static_cast<double>(healthy) / agent_days;
}

double false_quarantine_fraction(const SimulationTrace& trace) {
    return false_quarantine_fraction(trace, 1, static_cast<Day>(trace.simulated_days()));
}

double effective_contacts_per_agent_day(const SimulationTrace& trace) {
    if (trace.simulated_days() == 0 || trace.population() == 0) return 0.0;
    std::uint64_t encounters = 0;
    for (std::size_t d = 1; d < trace.days.size(); ++d) encounters += trace.days[d].encounters;
    return 2.0 * static_cast<double>(encounters) /
           (static_cast<double>(trace.population()) * static_cast<double>(trace.simulated_days()));
}

ParetoPoint pareto_point(const SimulationTrace& trace) {
    return {effective_contacts_per_agent_day(trace), estimate_r(trace)};
}

MetricsRow metrics_row(const SimulationTrace& trace) {
    MetricsRow row;
    row.config_hash = config_hash(trace.config);
    row.seed = trace.config.rng_seed;
    row.policy = policy_label(trace.config.policy, trace.config.predictor.kind);
    row.adoption = trace.config.adoption_rate;
    row.mobility_scale = trace.config.global_mobility_scale;
    const ParetoPoint p = pareto_point(trace);
    row.contacts = p.contacts;
    row.r = p.r;
    row.cumulative_cases = trace.events.size();
    row.false_quarantine = false_quarantine_fraction(trace);
    return row;
}

std::string csv_header() {
    return "config_hash,seed,policy,adoption,mobility_scale,contacts,R,cumulative_cases,false_quarantine,status";
}

std::string to_csv_row(const MetricsRow& row) {
    std::ostringstream os;
    os << row.config_hash << ',' << row.seed << ',' << row.policy << ',' << format_double(row.adoption) << ','
       << format_double(row.mobility_scale) << ',' << format_double(row.contacts) << ','
       << (row.r ? format_double(*row.r) : std::string(kUndefinedR)) << ',' << row.cumulative_cases << ','
       << format_double(row.false_quarantine) << ',' << row.status;
    return os.str();
}

MetricsRow parse_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::invalid_argument("expected 10 cells, got " + std::to_string(cells.size()));
    MetricsRow row;
    row.config_hash = cells[0];
    row.seed = std::stoull(cells[1]);
    row.policy = cells[2];
    row.adoption = parse_double(cells[3]);
    row.mobility_scale = parse_double(cells[4]);
    row.contacts = parse_double(cells[5]);
    if (cells[6] != kUndefinedR) row.r = parse_double(cells[6]);
    row.cumulative_cases = std::stoull(cells[7]);
    row.false_quarantine = parse_double(cells[8]);
    row.status = cells[9];
    return row;
}

}  // namespace pct
