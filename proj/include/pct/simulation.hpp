#pragma once

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pct/config.hpp"
#include "pct/messaging.hpp"
#include "pct/mobility.hpp"
#include "pct/rng.hpp"
#include "pct/tracing.hpp"
#include "pct/types.hpp"
#include "pct/virology.hpp"

namespace pct {

/// On-device state of an app user.
struct AppState {
    std::deque<ContactDay> contact_book;              // newest first, d_max+1 days
    Mailbox mailbox;
    std::vector<HealthStatus> history;                // one entry per simulated day from day 1
    std::vector<std::optional<double>> previous;      // last prediction, realigned to today
    BctState bct;
};

struct AgentState {
    AgentId id = 0;
    HealthProfile profile;
    bool has_smartphone = false;
    bool has_app = false;
    std::optional<DiseaseCourse> disease;
    EpiState epi_state = EpiState::Susceptible;
    RecommendationLevel rec_level = kBaselineLevel;  // in force for the next simulated day
    std::uint32_t household_id = 0;
    std::int32_t group_id = -1;  // workplace or school, -1 for none
    TestRecord test;
    std::int32_t app_index = -1;  // index into the app table
};

/// Counters for one simulated day. Entry 0 of a trace describes the
/// initial state right after seeding.
struct DayReport {
    Day day = 0;
    std::uint32_t susceptible = 0;
    std::uint32_t exposed = 0;
    std::uint32_t infectious = 0;
    std::uint32_t recovered = 0;
    std::uint32_t new_cases = 0;
    std::uint64_t cumulative_cases = 0;
    std::uint32_t quarantined_healthy = 0;  // level 4 while Susceptible or Recovered
    std::uint32_t quarantined_total = 0;
    std::uint64_t encounters = 0;
    double effective_contacts = 0.0;  // encounters * 2 / population
    std::uint64_t messages = 0;
    std::array<std::uint32_t, kQuarantineLevel + 1> level_counts{};
};

/// Observables and ground-truth targets of one app user on one day.
struct ObservationRecord {
    AgentId agent = 0;
    Observables observables;
    std::vector<double> targets;  // y for the same window, newest first
};

struct PredictionRecord {
    Day day = 0;
    AgentId agent = 0;
    std::vector<double> y_hat;
};

struct SimulationTrace {
    SimConfig config;
    std::uint32_t app_users = 0;
    std::vector<DayReport> days;
    std::vector<InfectionEvent> events;
    std::vector<EpiState> final_states;
    std::vector<Encounter> encounters;           // when config.record_encounters
    std::vector<ObservationRecord> observations; // when config.record_observables
    std::vector<PredictionRecord> predictions;   // Heuristic/PCT when config.record_predictions
    std::vector<double> message_risk_values;     // y_hat carried by every emitted PCT/Heuristic message

    std::uint32_t population() const { return config.population_size; }
    std::uint32_t simulated_days() const { return days.empty() ? 0U : static_cast<std::uint32_t>(days.size() - 1); }
};

/// Aborts a run on an internal invariant violation.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class World final : public GroundTruth {
public:
    /// Validates `config`, builds the population and seeds infections at day 0.
    explicit World(SimConfig config);

    /// Simulates the next day: progression, encounters, transmission,
    /// testing, app pass, recommendation update.
    DayReport step_day();

    Day current_day() const { return day_; }
    const SimConfig& config() const { return config_; }
    const std::vector<AgentState>& agents() const { return agents_; }
    const ContactPools& pools() const { return pools_; }
    const std::vector<InfectionEvent>& events() const { return events_; }
    const std::vector<Encounter>& last_encounters() const { return last_encounters_; }
    std::uint32_t app_users() const { return static_cast<std::uint32_t>(apps_.size()); }
    DayReport initial_report() const;

    double infectiousness(AgentId agent, Day day) const override;

    /// Opaque rotating token of an agent on a day.
    Token token(AgentId agent, Day day) const;

    /// Test hook: overrides every agent's level in force for the next day.
    void force_levels(RecommendationLevel level);

    /// Moves recorded per-agent data into `trace`.
    void collect_records(SimulationTrace& trace);

private:
    void build_population();
    void seed_infections();
    void progress_disease();
    std::uint32_t transmit(const std::vector<Encounter>& encounters);
    void advance_testing();
    std::uint64_t app_pass(std::vector<RecommendationLevel>& policy_levels);
    void update_recommendations(const std::vector<RecommendationLevel>& policy_levels);
    void deliver(const std::vector<OutgoingMessage>& messages);
    std::vector<Token> own_tokens(AgentId agent) const;
    void record_day(DayReport& report) const;

    SimConfig config_;
    Day day_ = 0;
    std::vector<AgentState> agents_;
    std::vector<AppState> apps_;
    std::vector<AgentId> app_owner_;  // app index -> agent
    ContactPools pools_;
    std::vector<InfectionEvent> events_;
    std::vector<Encounter> last_encounters_;
    std::unique_ptr<Predictor> predictor_;
    std::uint64_t token_secret_ = 0;
    std::unordered_map<Token, AgentId> token_owner_;

    Rng population_rng_;
    Rng seeding_rng_;
    Rng app_rng_;
    Rng disease_rng_;
    Rng mobility_rng_;
    Rng transmission_rng_;
    Rng testing_rng_;
    Rng symptoms_rng_;
    Rng behaviour_rng_;
    Rng predictor_rng_;

    std::vector<ObservationRecord> observations_;
    std::vector<PredictionRecord> predictions_;
    std::vector<double> message_risk_values_;
};

/// Runs `config.num_days` days and returns the full trace.
SimulationTrace run(const SimConfig& config);

}  // namespace pct
