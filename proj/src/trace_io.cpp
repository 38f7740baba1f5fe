#include "pct/trace_io.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "pct/metrics.hpp"

namespace pct {

using nlohmann::json;

void write_trace_jsonl(const SimulationTrace& trace, std::ostream& out) {
    std::map<Day, json> predictions;
    for (const auto& p : trace.predictions) {
        predictions[p.day].push_back({{"agent", p.agent}, {"y_hat", p.y_hat}});
    }
    for (const auto& d : trace.days) {
        json j = {{"day", d.day},
                  {"S", d.susceptible},
                  {"E", d.exposed},
                  {"I", d.infectious},
                  {"R", d.recovered},
                  {"new_cases", d.new_cases},
                  {"cumulative_cases", d.cumulative_cases},
                  {"quarantined_healthy", d.quarantined_healthy},
                  {"quarantined_total", d.quarantined_total},
                  {"encounters", d.encounters},
                  {"effective_contacts", d.effective_contacts},
                  {"messages", d.messages},
                  {"level_counts", d.level_counts}};
        if (const auto it = predictions.find(d.day); it != predictions.end()) j["predictions"] = it->second;
        out << j.dump() << '\n';
    }
}

void write_events_jsonl(const SimulationTrace& trace, std::ostream& out) {
    for (const auto& e : trace.events) {
        json j = {{"day", e.day},
                  {"infector", e.is_seed() ? json(nullptr) : json(e.infector)},
                  {"infectee", e.infectee},
                  {"location", e.location ? json(std::string(to_string(*e.location))) : json(nullptr)}};
        out << j.dump() << '\n';
    }
}

void write_run_outputs(const SimulationTrace& trace, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    const auto open = [](const std::filesystem::path& p) {
        std::ofstream os(p);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        return os;
    };
    {
        auto os = open(dir / "trace.jsonl");
        write_trace_jsonl(trace, os);
        if (!os) throw std::runtime_error("write failed: " + (dir / "trace.jsonl").string());
    }
    {
        auto os = open(dir / "events.jsonl");
        write_events_jsonl(trace, os);
        if (!os) throw std::runtime_error("write failed: " + (dir / "events.jsonl").string());
    }
    auto os = open(dir / "metrics.csv");
    os << csv_header() << '\n' << to_csv_row(metrics_row(trace)) << '\n';
    if (!os) throw std::runtime_error("write failed: " + (dir / "metrics.csv").string());
}

}  // namespace pct
