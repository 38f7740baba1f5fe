#include <doctest.h>

#include <random>

#include "pct/metrics.hpp"

using namespace pct;

namespace {

InfectionEvent seed_event(AgentId who) { return {0, kExternalSeed, who, std::nullopt}; }
InfectionEvent infect(Day day, AgentId from, AgentId to) { return {day, from, to, LocationType::Other}; }

// Quadratic recount straight from the definition.
std::optional<double> brute_force_r(const std::vector<InfectionEvent>& events, const std::vector<EpiState>& states,
                                    DayWindow window) {
    double parents = 0.0;
    double offspring = 0.0;
    for (const auto& p : events) {
        if (p.infector == kExternalSeed) continue;
        if (p.day < window.first || p.day > window.last) continue;
        if (states[p.infectee] != EpiState::Recovered) continue;
        parents += 1.0;
        for (const auto& c : events) {
            if (c.infector == p.infectee) offspring += 1.0;
        }
    }
    if (parents == 0.0) return std::nullopt;
    return offspring / parents;
}

SimulationTrace trace_with(std::uint32_t population, std::vector<DayReport> days) {
    SimulationTrace t;
    t.config.population_size = population;
    t.days = std::move(days);
    return t;
}

}  // namespace

TEST_CASE("R on small forests") {
    std::vector<EpiState> states(10, EpiState::Recovered);
    const DayWindow all{1, 100};

    SUBCASE("one infector with two children") {
        const std::vector<InfectionEvent> ev = {seed_event(0), infect(2, 0, 1), infect(5, 1, 2), infect(6, 1, 3)};
        states[2] = states[3] = EpiState::Exposed;
        CHECK(estimate_r(ev, states, all) == 2.0);
    }
    SUBCASE("infectors with three and zero children") {
        const std::vector<InfectionEvent> ev = {seed_event(0), infect(1, 0, 1), infect(1, 0, 2), infect(4, 1, 3),
                                                infect(4, 1, 4),  infect(5, 1, 5)};
        states[3] = states[4] = states[5] = EpiState::Infectious;
        CHECK(estimate_r(ev, states, all) == 1.5);
    }
    SUBCASE("only seeds is undefined") {
        const std::vector<InfectionEvent> ev = {seed_event(0), seed_event(1)};
        CHECK_FALSE(estimate_r(ev, states, all).has_value());
        CHECK_FALSE(estimate_r({}, states, all).has_value());
    }
    SUBCASE("infectors outside the window or not recovered are skipped") {
        const std::vector<InfectionEvent> ev = {seed_event(0), infect(1, 0, 1), infect(20, 0, 2), infect(22, 2, 3)};
        CHECK(estimate_r(ev, states, {1, 10}) == 0.0);
        states[1] = EpiState::Infectious;
        CHECK_FALSE(estimate_r(ev, states, {1, 10}).has_value());
    }
}

TEST_CASE("R matches brute force on fuzzed forests") {
    std::mt19937_64 gen(20240611);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(gen() % 50);
        std::vector<AgentId> order(n);
        for (AgentId i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), gen);
        const std::uint32_t infected = static_cast<std::uint32_t>(gen() % (n + 1));
        const std::uint32_t seeds = infected == 0 ? 0 : 1 + static_cast<std::uint32_t>(gen() % std::min(infected, 4U));

        std::vector<InfectionEvent> ev;
        std::vector<Day> day_of(n, -1);
        std::vector<EpiState> states(n, EpiState::Susceptible);
        for (std::uint32_t k = 0; k < infected; ++k) {
            const AgentId who = order[k];
            if (k < seeds) {
                ev.push_back(seed_event(who));
                day_of[who] = 0;
            } else {
                const AgentId parent = order[gen() % k];
                day_of[who] = day_of[parent] + 1 + static_cast<Day>(gen() % 6);
                ev.push_back(infect(day_of[who], parent, who));
            }
            states[who] = static_cast<EpiState>(1 + gen() % 3);
        }
        std::shuffle(ev.begin(), ev.end(), gen);
        const Day first = static_cast<Day>(gen() % 4);
        const DayWindow w{first, first + static_cast<Day>(gen() % 40)};
        REQUIRE(estimate_r(ev, states, w) == brute_force_r(ev, states, w));
    }
}

TEST_CASE("malformed logs are rejected") {
    const std::vector<EpiState> states(5, EpiState::Recovered);
    const DayWindow w{1, 50};
    CHECK_THROWS_AS(estimate_r(std::vector{seed_event(0), infect(1, 0, 1), infect(2, 0, 1)}, states, w),
                    MalformedEventLog);
    CHECK_THROWS_AS(estimate_r(std::vector{infect(1, 2, 2)}, states, w), MalformedEventLog);
    CHECK_THROWS_AS(estimate_r(std::vector{seed_event(0), infect(1, 3, 1)}, states, w), MalformedEventLog);
    CHECK_THROWS_AS(estimate_r(std::vector{infect(1, 1, 2), infect(2, 2, 1)}, states, w), MalformedEventLog);
}

TEST_CASE("false quarantine fraction") {
    std::vector<DayReport> days(2);
    days[1].quarantined_healthy = 1;
    CHECK(false_quarantine_fraction(trace_with(3, days)) == doctest::Approx(1.0 / 3.0));

    std::vector<DayReport> longer(5);
    longer[1].quarantined_healthy = 4;
    longer[3].quarantined_healthy = 2;
    const auto t = trace_with(10, longer);
    CHECK(false_quarantine_fraction(t) == doctest::Approx(6.0 / 40.0));
    CHECK(false_quarantine_fraction(t, 2, 3) == doctest::Approx(2.0 / 20.0));
    CHECK(false_quarantine_fraction(t, 3, 2) == 0.0);
    CHECK(false_quarantine_fraction(trace_with(10, {DayReport{}})) == 0.0);
}

TEST_CASE("contacts recounted from recorded encounters") {
    SimConfig c;
    c.population_size = 600;
    c.num_days = 12;
    c.record_encounters = true;
    c.global_mobility_scale = 1.5;
    const auto t = run(c);
    REQUIRE_FALSE(t.encounters.empty());
    const double recount = 2.0 * static_cast<double>(t.encounters.size()) / (600.0 * 12.0);
    CHECK(effective_contacts_per_agent_day(t) == doctest::Approx(recount));
    CHECK(pareto_point(t).contacts == effective_contacts_per_agent_day(t));
}

TEST_CASE("metrics csv round trip") {
    MetricsRow row;
    row.config_hash = "00ff00ff00ff00ff";
    row.seed = 7;
    row.policy = "PCT-Oracle";
    row.adoption = 0.6;
    row.mobility_scale = 2.0625;
    row.contacts = 5.123456789;
    row.r = 1.1;
    row.cumulative_cases = 431;
    row.false_quarantine = 0.0123;
    const MetricsRow back = parse_csv_row(to_csv_row(row));
    CHECK(to_csv_row(back) == to_csv_row(row));
    CHECK(back.r == row.r);
    CHECK(back.contacts == row.contacts);

    row.r.reset();
    const std::string line = to_csv_row(row);
    CHECK(line.find(kUndefinedR) != std::string::npos);
    CHECK_FALSE(parse_csv_row(line).r.has_value());
    const std::string header = csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 9);
    CHECK_THROWS_AS(parse_csv_row("a,b,c"), std::invalid_argument);
}
