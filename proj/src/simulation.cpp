#include "pct/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace pct {

namespace {

// Household size categorical over 1..5, mean 2.59.
constexpr std::array<double, 5> kHouseholdSizeWeights = {0.25, 0.30, 0.17, 0.17, 0.11};
constexpr std::uint32_t kWorkplaceSize = 20;
constexpr std::uint32_t kSchoolClassSize = 25;
constexpr double kEmploymentRate = 0.75;
// Age band of household heads and of further members.
constexpr std::array<double, 3> kHeadAgeWeights = {0.0, 0.8, 0.2};
constexpr std::array<double, 3> kMemberAgeWeights = {0.45, 0.45, 0.10};
// Prevalence of each pre-existing condition by age band.
constexpr std::array<std::array<double, 3>, kNumConditions> kConditionPrevalence = {{
    {0.01, 0.06, 0.25},
    {0.01, 0.07, 0.20},
    {0.01, 0.02, 0.05},
}};
// Days a known positive result keeps the agent and its household quarantined.
constexpr Day kPositiveQuarantineDays = 14;
// Transmission multiplier of the setting where an encounter happens.
constexpr double kLocationEnvironment = 1.0;

template <std::size_t N>
std::size_t draw_categorical(const std::array<double, N>& weights, Rng& rng) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < N; ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return N - 1;
}

void ensure(bool ok, const std::string& what) {
    if (!ok) throw InvariantViolation(what);
}

std::uint32_t rounded_count(double fraction, std::uint32_t n) {
    return static_cast<std::uint32_t>(std::lround(fraction * static_cast<double>(n)));
}

bool positive_recent(const TestRecord& test, Day day) {
    const TestResult r = test.known_on(day);
    return r.kind == TestResult::Kind::Positive && day <= r.day + kPositiveQuarantineDays;
}

}  // namespace

World::World(SimConfig config)
    : config_(std::move(config)),
      population_rng_(config_.rng_seed, Stream::Population),
      seeding_rng_(config_.rng_seed, Stream::Seeding),
      app_rng_(config_.rng_seed, Stream::AppInstall),
      disease_rng_(config_.rng_seed, Stream::Disease),
      mobility_rng_(config_.rng_seed, Stream::Mobility),
      transmission_rng_(config_.rng_seed, Stream::Transmission),
      testing_rng_(config_.rng_seed, Stream::Testing),
      symptoms_rng_(config_.rng_seed, Stream::Symptoms),
      behaviour_rng_(config_.rng_seed, Stream::Behaviour),
      predictor_rng_(config_.rng_seed, Stream::Predictor) {
    validate(config_);
    token_secret_ = Rng(config_.rng_seed, Stream::Tokens).next_u64();
    build_population();
    seed_infections();

    if (config_.policy == Policy::PCT) {
        switch (config_.predictor.kind) {
            case PredictorKind::Oracle:
                predictor_ = std::make_unique<OraclePredictor>(config_.d_max);
                break;
            case PredictorKind::NoisyOracle:
                predictor_ = std::make_unique<NoisyOraclePredictor>(config_.d_max, config_.predictor.add_sigma,
                                                                    config_.predictor.mul_sigma);
                break;
            case PredictorKind::External:
                predictor_ = std::make_unique<ExternalPredictor>(
                    config_.predictor.external_command, config_.predictor.external_work_dir,
                    config_hash(config_) + "_" + std::to_string(config_.rng_seed), config_.d_max);
                break;
        }
    }
}

void World::build_population() {
    const std::uint32_t n = config_.population_size;
    agents_.resize(n);
    pools_.household_of.assign(n, 0);
    pools_.group_of.assign(n, -1);

    AgentId next = 0;
    while (next < n) {
        const auto size = static_cast<std::uint32_t>(draw_categorical(kHouseholdSizeWeights, population_rng_) + 1);
        const std::uint32_t members = std::min(size, n - next);
        const auto hh = static_cast<std::uint32_t>(pools_.households.size());
        auto& pool = pools_.households.emplace_back();
        for (std::uint32_t m = 0; m < members; ++m, ++next) {
            AgentState& a = agents_[next];
            a.id = next;
            a.household_id = hh;
            a.profile.age = static_cast<AgeBand>(
                draw_categorical(m == 0 ? kHeadAgeWeights : kMemberAgeWeights, population_rng_));
            a.profile.sex = population_rng_.bernoulli(0.5) ? Sex::Female : Sex::Male;
            for (std::size_t c = 0; c < kNumConditions; ++c) {
                if (population_rng_.bernoulli(kConditionPrevalence[c][static_cast<std::size_t>(a.profile.age)])) {
                    a.profile.conditions |= static_cast<std::uint8_t>(1U << c);
                }
            }
            pools_.household_of[next] = hh;
            pool.push_back(next);
        }
    }

    std::vector<AgentId> students;
    std::vector<AgentId> workers;
    for (const auto& a : agents_) {
        if (a.profile.age == AgeBand::Child) {
            students.push_back(a.id);
        } else if (a.profile.age == AgeBand::Adult && population_rng_.bernoulli(kEmploymentRate)) {
            workers.push_back(a.id);
        }
    }
    const auto assign_groups = [&](std::vector<AgentId>& members, std::uint32_t size, LocationType type) {
        std::shuffle(members.begin(), members.end(), population_rng_.engine());
        for (std::size_t i = 0; i < members.size(); i += size) {
            const auto g = static_cast<std::int32_t>(pools_.groups.size());
            auto& group = pools_.groups.emplace_back();
            pools_.group_type.push_back(type);
            for (std::size_t j = i; j < std::min(members.size(), i + size); ++j) {
                group.push_back(members[j]);
                pools_.group_of[members[j]] = g;
                agents_[members[j]].group_id = g;
            }
        }
    };
    assign_groups(workers, kWorkplaceSize, LocationType::Workplace);
    assign_groups(students, kSchoolClassSize, LocationType::School);

    // Smartphone owners first, then app users drawn among them.
    std::vector<AgentId> order(n);
    std::iota(order.begin(), order.end(), 0U);
    std::shuffle(order.begin(), order.end(), app_rng_.engine());
    const std::uint32_t owners = rounded_count(config_.smartphone_rate, n);
    const std::uint32_t users = rounded_count(config_.adoption_rate, n);
    ensure(users <= owners, "more app users than smartphone owners");
    for (std::uint32_t i = 0; i < owners; ++i) agents_[order[i]].has_smartphone = true;
    std::vector<AgentId> installs(order.begin(), order.begin() + owners);
    std::shuffle(installs.begin(), installs.end(), app_rng_.engine());
    installs.resize(users);
    std::sort(installs.begin(), installs.end());
    for (const AgentId id : installs) {
        AgentState& a = agents_[id];
        a.has_app = true;
        a.app_index = static_cast<std::int32_t>(apps_.size());
        AppState app;
        app.contact_book.assign(static_cast<std::size_t>(config_.d_max) + 1, ContactDay{});
        app.previous.assign(static_cast<std::size_t>(config_.d_max) + 1, std::nullopt);
        apps_.push_back(std::move(app));
        app_owner_.push_back(id);
    }
}

void World::seed_infections() {
    const std::uint32_t n = config_.population_size;
    const std::uint32_t seeds = rounded_count(config_.initial_exposed_fraction, n);
    std::vector<AgentId> order(n);
    std::iota(order.begin(), order.end(), 0U);
    std::shuffle(order.begin(), order.end(), seeding_rng_.engine());
    order.resize(seeds);
    std::sort(order.begin(), order.end());
    for (const AgentId id : order) {
        AgentState& a = agents_[id];
        a.disease = sample_disease_course(0, disease_rng_);
        a.epi_state = EpiState::Exposed;
        events_.push_back(InfectionEvent{0, kExternalSeed, id, std::nullopt});
    }
}

Token World::token(AgentId agent, Day day) const {
    return mix64(token_secret_ ^ mix64((static_cast<std::uint64_t>(agent) << 32) ^ static_cast<std::uint32_t>(day)));
}

std::vector<Token> World::own_tokens(AgentId agent) const {
    std::vector<Token> out(static_cast<std::size_t>(config_.d_max) + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = token(agent, day_ - static_cast<Day>(k));
    return out;
}

double World::infectiousness(AgentId agent, Day day) const {
    return ground_truth_infectiousness(agents_[agent].disease, day);
}

void World::force_levels(RecommendationLevel level) {
    for (auto& a : agents_) a.rec_level = level;
}

DayReport World::initial_report() const {
    DayReport r;
    r.day = day_;
    record_day(r);
    r.new_cases = static_cast<std::uint32_t>(events_.size());
    r.cumulative_cases = events_.size();
    return r;
}

void World::record_day(DayReport& r) const {
    r.susceptible = r.exposed = r.infectious = r.recovered = 0;
    r.quarantined_healthy = r.quarantined_total = 0;
    r.level_counts.fill(0);
    for (const auto& a : agents_) {
        switch (a.epi_state) {
            case EpiState::Susceptible: ++r.susceptible; break;
            case EpiState::Exposed: ++r.exposed; break;
            case EpiState::Infectious: ++r.infectious; break;
            case EpiState::Recovered: ++r.recovered; break;
        }
    }
    ensure(r.susceptible + r.exposed + r.infectious + r.recovered == config_.population_size,
           "epi-state counts do not sum to the population on day " + std::to_string(r.day));
}

void World::progress_disease() {
    for (auto& a : agents_) {
        if (!a.disease) continue;
        const EpiState next = epi_state_on(*a.disease, day_);
        ensure(next >= a.epi_state, "epi state moved backwards for agent " + std::to_string(a.id));
        a.epi_state = next;
    }
}

std::uint32_t World::transmit(const std::vector<Encounter>& encounters) {
    std::uint32_t infections = 0;
    for (const auto& e : encounters) {
        for (const auto& [src, dst] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            const AgentState& infector = agents_[src];
            AgentState& target = agents_[dst];
            if (infector.epi_state != EpiState::Infectious || target.epi_state != EpiState::Susceptible) continue;
            const double evl = infectiousness(src, day_);
            if (!transmission_trial(evl, config_.base_transmission_rate, kLocationEnvironment, config_.carefulness,
                                    transmission_rng_)) {
                continue;
            }
            target.disease = sample_disease_course(day_, disease_rng_);
            target.epi_state = EpiState::Exposed;
            events_.push_back(InfectionEvent{day_, src, dst, e.location});
            ++infections;
        }
    }
    return infections;
}

void World::advance_testing() {
    const TestingParams params{config_.carefulness, config_.test_delay_days, config_.test_false_negative_rate};
    for (auto& a : agents_) {
        if (a.disease) maybe_order_test(a.disease, day_, params, a.test, testing_rng_);
    }
}

void World::deliver(const std::vector<OutgoingMessage>& messages) {
    for (const auto& m : messages) {
        const auto it = token_owner_.find(m.recipient_token);
        if (it == token_owner_.end()) continue;
        apps_[static_cast<std::size_t>(agents_[it->second].app_index)].mailbox.deliver(m.message);
    }
}

std::uint64_t World::app_pass(std::vector<RecommendationLevel>& policy_levels) {
    const bool tracing = config_.policy != Policy::NoTracing;
    if (!tracing && !config_.record_observables) return 0;

    const SymptomNoise noise{config_.symptom_dropout, config_.symptom_dropin};
    const std::size_t window = static_cast<std::size_t>(config_.d_max) + 1;
    const Day oldest = day_ - config_.d_max;
    std::uint64_t sent = 0;

    std::vector<std::vector<RiskMessage>> received(apps_.size());
    std::vector<Observables> observables(apps_.size());
    for (std::size_t i = 0; i < apps_.size(); ++i) {
        const AgentState& agent = agents_[app_owner_[i]];
        AppState& app = apps_[i];
        app.history.push_back(update_health_status(agent.disease, agent.test, day_, noise, symptoms_rng_));
        received[i] = app.mailbox.drain(oldest);
        const bool needs_obs = config_.record_observables || config_.policy == Policy::Heuristic ||
                               config_.policy == Policy::PCT;
        if (needs_obs) {
            observables[i] = build_observables(agent.profile, day_, config_.d_max, app.history, 1,
                                               cluster_inbox(app.mailbox.visible()));
        }
    }

    std::vector<std::optional<InfectiousnessEstimate>> estimates(apps_.size());
    if (config_.policy == Policy::PCT) {
        std::vector<PredictionRequest> requests(apps_.size());
        for (std::size_t i = 0; i < apps_.size(); ++i) requests[i] = {app_owner_[i], &observables[i]};
        try {
            estimates = predictor_->predict(requests, *this, predictor_rng_);
        } catch (const std::exception&) {
            estimates.assign(apps_.size(), std::nullopt);
        }
        ensure(estimates.size() == apps_.size(), "predictor returned a batch of the wrong size");
    }

    std::vector<std::vector<OutgoingMessage>> outgoing(apps_.size());
    for (std::size_t i = 0; i < apps_.size(); ++i) {
        const AgentId id = app_owner_[i];
        AppState& app = apps_[i];
        const std::vector<ContactDay> book(app.contact_book.begin(), app.contact_book.end());
        const std::vector<Token> tokens = own_tokens(id);
        std::optional<InfectiousnessEstimate> estimate;

        switch (config_.policy) {
            case Policy::NoTracing:
                policy_levels[id] = policy_no_tracing();
                break;
            case Policy::BCT: {
                auto d = policy_bct(app.bct, app.history.back(), received[i], book, tokens, day_,
                                    config_.bct_quarantine_level);
                policy_levels[id] = d.level;
                outgoing[i] = std::move(d.messages);
                break;
            }
            case Policy::Heuristic: {
                auto d = policy_heuristic(observables[i], config_.heuristic);
                policy_levels[id] = d.level;
                outgoing[i] = diff_and_emit(app.previous, d.estimate.y_hat, book, tokens, config_.thresholds, day_);
                estimate = std::move(d.estimate);
                break;
            }
            case Policy::PCT: {
                auto d = policy_pct(estimates[i], app.previous, book, tokens, config_.thresholds, config_.psi, day_);
                policy_levels[id] = d.level;
                outgoing[i] = std::move(d.messages);
                estimate = std::move(d.estimate);
                break;
            }
        }

        // Realign the prediction for tomorrow: slot k becomes slot k+1.
        std::vector<std::optional<double>> next(window, std::nullopt);
        for (std::size_t k = 0; k + 1 < window; ++k) {
            next[k + 1] = estimate ? std::optional<double>(estimate->y_hat[k]) : app.previous[k];
        }
        app.previous = std::move(next);

        if (config_.record_predictions && estimate) {
            predictions_.push_back(PredictionRecord{day_, id, estimate->y_hat});
            for (const auto& m : outgoing[i]) {
                const auto k = static_cast<std::size_t>(day_ - m.message.encounter_day);
                message_risk_values_.push_back(estimate->y_hat[k]);
            }
        }
        if (config_.record_observables) {
            ObservationRecord rec;
            rec.agent = id;
            rec.targets.reserve(window);
            for (std::size_t k = 0; k < window; ++k) rec.targets.push_back(infectiousness(id, day_ - static_cast<Day>(k)));
            rec.observables = std::move(observables[i]);
            observations_.push_back(std::move(rec));
        }
    }
    for (const auto& batch : outgoing) {
        deliver(batch);
        sent += batch.size();
    }
    return sent;
}

void World::update_recommendations(const std::vector<RecommendationLevel>& policy_levels) {
    std::unordered_set<std::uint32_t> positive_households;
    for (const auto& a : agents_) {
        if (positive_recent(a.test, day_)) positive_households.insert(a.household_id);
    }
    for (auto& a : agents_) {
        RecommendationLevel level = a.has_app ? policy_levels[a.id] : policy_no_tracing();
        if (positive_recent(a.test, day_)) {
            level = behaviour_rng_.bernoulli(config_.quarantine_dropout_test) ? kBaselineLevel : kQuarantineLevel;
        } else if (positive_households.contains(a.household_id)) {
            if (!behaviour_rng_.bernoulli(config_.quarantine_dropout_household)) level = kQuarantineLevel;
        }
        if (behaviour_rng_.bernoulli(config_.all_levels_dropout)) level = kMinLevel;
        a.rec_level = level;
    }
}

DayReport World::step_day() {
    ++day_;
    DayReport report;
    report.day = day_;

    // Levels in force today were fixed at the end of yesterday.
    std::vector<RecommendationLevel> levels(agents_.size());
    for (const auto& a : agents_) levels[a.id] = a.rec_level;

    progress_disease();

    // Rotate app contact books and the token routing table.
    for (auto& app : apps_) {
        app.contact_book.push_front(ContactDay{});
        while (app.contact_book.size() > static_cast<std::size_t>(config_.d_max) + 1) app.contact_book.pop_back();
    }
    for (const AgentId id : app_owner_) {
        token_owner_.erase(token(id, day_ - config_.d_max - 1));
        token_owner_.emplace(token(id, day_), id);
    }

    last_encounters_ = generate_encounters(pools_, levels, config_.global_mobility_scale, day_, mobility_rng_);
    for (const auto& e : last_encounters_) {
        const auto& a = agents_[e.a];
        const auto& b = agents_[e.b];
        if (!a.has_app || !b.has_app) continue;
        apps_[static_cast<std::size_t>(a.app_index)].contact_book.front().push_back(token(e.b, day_));
        apps_[static_cast<std::size_t>(b.app_index)].contact_book.front().push_back(token(e.a, day_));
    }

    report.new_cases = transmit(last_encounters_);
    advance_testing();

    std::vector<RecommendationLevel> policy_levels(agents_.size(), kBaselineLevel);
    report.messages = app_pass(policy_levels);
    update_recommendations(policy_levels);

    record_day(report);
    for (const auto& a : agents_) {
        const RecommendationLevel in_force = levels[a.id];
        ++report.level_counts[static_cast<std::size_t>(in_force)];
        if (in_force != kQuarantineLevel) continue;
        ++report.quarantined_total;
        if (a.epi_state == EpiState::Susceptible || a.epi_state == EpiState::Recovered) ++report.quarantined_healthy;
    }
    report.cumulative_cases = events_.size();
    report.encounters = last_encounters_.size();
    report.effective_contacts =
        2.0 * static_cast<double>(report.encounters) / static_cast<double>(config_.population_size);
    return report;
}

void World::collect_records(SimulationTrace& trace) {
    trace.observations = std::move(observations_);
    trace.predictions = std::move(predictions_);
    trace.message_risk_values = std::move(message_risk_values_);
    observations_.clear();
    predictions_.clear();
    message_risk_values_.clear();
}

SimulationTrace run(const SimConfig& config) {
    World world(config);
    SimulationTrace trace;
    trace.config = world.config();
    trace.app_users = world.app_users();
    trace.days.reserve(config.num_days + 1);
    trace.days.push_back(world.initial_report());
    for (std::uint32_t d = 0; d < config.num_days; ++d) {
        trace.days.push_back(world.step_day());
        if (config.record_encounters) {
            const auto& enc = world.last_encounters();
            trace.encounters.insert(trace.encounters.end(), enc.begin(), enc.end());
        }
    }
    trace.events = world.events();
    trace.final_states.reserve(world.agents().size());
    for (const auto& a : world.agents()) trace.final_states.push_back(a.epi_state);
    world.collect_records(trace);
    return trace;
}

}  // namespace pct
