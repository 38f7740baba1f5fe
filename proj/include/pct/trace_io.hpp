#pragma once

#include <filesystem>
#include <ostream>

#include "pct/simulation.hpp"

namespace pct {

/// One JSON object per day: day index, compartment counts, new and cumulative
/// cases, quarantine counts, encounters, contacts, messages and level counts.
/// PCT/Heuristic traces also carry the predictions of that day.
void write_trace_jsonl(const SimulationTrace& trace, std::ostream& out);

/// One JSON object per infection event.
void write_events_jsonl(const SimulationTrace& trace, std::ostream& out);

/// Writes trace.jsonl, events.jsonl and metrics.csv into `dir`. Throws
/// std::runtime_error naming the file on I/O failure.
void write_run_outputs(const SimulationTrace& trace, const std::filesystem::path& dir);

}  // namespace pct
