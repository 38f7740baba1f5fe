#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pct/simulation.hpp"

namespace pct {

/// Days [first, last] over which an infector's own infection day must fall.
struct DayWindow {
    Day first = 0;
    Day last = 0;

    bool contains(Day d) const { return d >= first && d <= last; }
};

/// Raised when an event log is not a forest.
class MalformedEventLog : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Children of recovered, non-seed infectors infected within `window`,
/// divided by the number of such infectors. Empty when there are none.
/// `states` is indexed by agent id.
std::optional<double> estimate_r(std::span<const InfectionEvent> events, std::span<const EpiState> states,
                                 DayWindow window);

/// Default window: day 1 up to the last day minus the exclusion margin.
DayWindow default_r_window(const SimulationTrace& trace);
std::optional<double> estimate_r(const SimulationTrace& trace);

/// Agent-days at quarantine level while Susceptible or Recovered over all
/// agent-days in [first, last] (1-based simulated days).
double false_quarantine_fraction(const SimulationTrace& trace, Day first, Day last);
double false_quarantine_fraction(const SimulationTrace& trace);

/// Encounters * 2 / (population * simulated days).
double effective_contacts_per_agent_day(const SimulationTrace& trace);

struct ParetoPoint {
    double contacts = 0.0;
    std::optional<double> r;
};

ParetoPoint pareto_point(const SimulationTrace& trace);

/// One metrics row, serialized by `to_csv_row`.
struct MetricsRow {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string policy;
    double adoption = 0.0;
    double mobility_scale = 0.0;
    double contacts = 0.0;
    std::optional<double> r;
    std::uint64_t cumulative_cases = 0;
    double false_quarantine = 0.0;
    std::string status = "ok";
};

MetricsRow metrics_row(const SimulationTrace& trace);

/// Text used in CSV cells for an undefined R.
inline constexpr const char* kUndefinedR = "undefined";

std::string csv_header();
std::string to_csv_row(const MetricsRow& row);
/// Inverse of `to_csv_row`. Throws std::invalid_argument on malformed rows.
MetricsRow parse_csv_row(const std::string& line);

}  // namespace pct
