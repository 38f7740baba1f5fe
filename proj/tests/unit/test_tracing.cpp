#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "pct/tracing.hpp"
#include "pct/virology.hpp"

using namespace pct;

namespace {

// Ground truth backed by explicit courses.
struct CourseTable final : GroundTruth {
    std::map<AgentId, DiseaseCourse> courses;
    double infectiousness(AgentId agent, Day day) const override {
        const auto it = courses.find(agent);
        return it == courses.end() ? 0.0 : ground_truth_infectiousness(it->second, day);
    }
};

DiseaseCourse course_at(Day exposure) {
    DiseaseCourse c;
    c.exposure_day = exposure;
    c.infectiousness_onset = 2.5;
    c.peak = 4.3;
    c.symptom_onset = 5.0;
    c.recovery = 19.0;
    c.peak_evl = 0.8;
    return c;
}

Observables empty_obs(Day day, int d_max = 14) {
    Observables o;
    o.day = day;
    o.slots.resize(static_cast<std::size_t>(d_max) + 1);
    for (auto& s : o.slots) s = DaySlot{};
    return o;
}

std::vector<Token> tokens_for(int window, Token base) {
    std::vector<Token> t;
    for (int k = 0; k < window; ++k) t.push_back(base + static_cast<Token>(k));
    return t;
}

}  // namespace

TEST_CASE("no tracing always returns level 1") {
    CHECK(policy_no_tracing() == 1);
}

TEST_CASE("bct quarantine and broadcast") {
    const Day today = 30;
    std::vector<ContactDay> book(15);
    book[0] = {1, 1, 2};
    book[5] = {3};
    book[14] = {4};
    const auto own = tokens_for(15, 500);

    SUBCASE("no test, no messages") {
        BctState st;
        const auto d = policy_bct(st, HealthStatus{}, {}, book, own, today, kQuarantineLevel);
        CHECK(d.level == 1);
        CHECK(d.messages.empty());
    }
    SUBCASE("received flag on day 10 quarantines through day 24") {
        BctState st;
        const std::vector<RiskMessage> flag = {{77, 8, kPositiveFlag}};
        CHECK(policy_bct(st, HealthStatus{}, flag, book, own, 10, kQuarantineLevel).level == 4);
        CHECK(policy_bct(st, HealthStatus{}, {}, book, own, 24, kQuarantineLevel).level == 4);
        CHECK(policy_bct(st, HealthStatus{}, {}, book, own, 25, kQuarantineLevel).level == 1);
    }
    SUBCASE("own positive broadcasts once to distinct contacts of the last 14 days") {
        BctState st;
        HealthStatus h;
        h.test_result = TestResult::positive(today);
        const auto d = policy_bct(st, h, {}, book, own, today, kQuarantineLevel);
        CHECK(d.level == 4);
        std::set<std::pair<Day, Token>> expected;
        for (std::size_t k = 0; k < book.size(); ++k) {
            for (Token t : book[k]) expected.emplace(today - static_cast<Day>(k), t);
        }
        CHECK(d.messages.size() == expected.size());
        for (const auto& m : d.messages) {
            CHECK(m.message.level == kPositiveFlag);
            CHECK(expected.contains({m.message.encounter_day, m.recipient_token}));
            CHECK(m.message.sender_token == own[static_cast<std::size_t>(today - m.message.encounter_day)]);
        }
        CHECK(policy_bct(st, h, {}, book, own, today + 1, kQuarantineLevel).messages.empty());
    }
    SUBCASE("contact 15 days before the result is not flagged") {
        std::vector<ContactDay> long_book(16);
        long_book[15] = {9};
        BctState st;
        HealthStatus h;
        h.test_result = TestResult::positive(today);
        const auto d = policy_bct(st, h, {}, long_book, tokens_for(16, 0), today, kQuarantineLevel);
        CHECK(d.messages.empty());
    }
    SUBCASE("configurable quarantine level") {
        BctState st;
        const std::vector<RiskMessage> flag = {{77, 8, kPositiveFlag}};
        CHECK(policy_bct(st, HealthStatus{}, flag, book, own, 10, 3).level == 3);
    }
}

TEST_CASE("heuristic ladder") {
    const HeuristicLadder ladder;

    SUBCASE("empty observables") {
        const auto d = policy_heuristic(empty_obs(20), ladder);
        CHECK(d.level == 1);
        CHECK(d.estimate.y_hat == std::vector<double>(15, 0.0));
    }
    SUBCASE("positive test") {
        Observables o = empty_obs(20);
        o.slots[0]->health.test_result = TestResult::positive(20);
        const auto d = policy_heuristic(o, ladder);
        CHECK(d.level == 4);
        for (double y : d.estimate.y_hat) CHECK(y == ladder.positive_y);
    }
    SUBCASE("max inbox level 9, no symptoms") {
        Observables o = empty_obs(20);
        o.slots[3]->encounters = {{RiskLevel(9), 1}, {RiskLevel(2), 4}};
        const auto d = policy_heuristic(o, ladder);
        CHECK(d.level == 2);
        CHECK(d.estimate.y_hat[3] == doctest::Approx(ladder.risk_y * 9.0 / 15.0));
        CHECK(d.estimate.y_hat[0] == 0.0);
    }
    SUBCASE("two symptoms") {
        Observables o = empty_obs(20);
        o.slots[0]->health.reported_symptoms.insert(Symptom::Fever);
        o.slots[0]->health.reported_symptoms.insert(Symptom::Cough);
        const auto d = policy_heuristic(o, ladder);
        CHECK(d.level == 3);
        CHECK(d.estimate.y_hat[0] == doctest::Approx(0.4));
    }
    SUBCASE("one symptom or low risk") {
        Observables o = empty_obs(20);
        o.slots[0]->health.reported_symptoms.insert(Symptom::Fever);
        CHECK(policy_heuristic(o, ladder).level == 2);
        Observables r = empty_obs(20);
        r.slots[1]->encounters = {{RiskLevel(5), 1}};
        CHECK(policy_heuristic(r, ladder).level == 1);
        r.slots[1]->encounters = {{RiskLevel(12), 1}};
        CHECK(policy_heuristic(r, ladder).level == 3);
    }
    SUBCASE("negative test halves the score") {
        Observables o = empty_obs(20);
        o.slots[2]->encounters = {{RiskLevel(15), 1}};
        o.slots[0]->health.test_result = TestResult::negative(19);
        CHECK(policy_heuristic(o, ladder).estimate.y_hat[2] == doctest::Approx(0.25));
    }
}

TEST_CASE("oracle predictions") {
    CourseTable truth;
    truth.courses[1] = course_at(10);

    const auto none = predict_oracle(truth, 0, 30, 14);
    CHECK(none.y_hat == std::vector<double>(15, 0.0));

    const auto est = predict_oracle(truth, 1, 20, 14);
    REQUIRE(est.y_hat.size() == 15);
    for (int k = 0; k <= 14; ++k) {
        const Day day = 20 - k;
        const double t = day - 10 + 0.5;
        CHECK(est.y_hat[static_cast<std::size_t>(k)] == effective_viral_load(truth.courses[1], t));
        if (day < 10) CHECK(est.y_hat[static_cast<std::size_t>(k)] == 0.0);
    }
    CHECK(est.today() == est.y_hat[0]);
}

TEST_CASE("noisy oracle") {
    CourseTable truth;
    truth.courses[1] = course_at(0);
    Rng rng(5);
    CHECK(predict_noisy_oracle(truth, 1, 8, 14, 0.0, 0.0, rng) == predict_oracle(truth, 1, 8, 14));

    // y = 0: E[max(0, eps)] = sigma / sqrt(2 pi)
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto e = predict_noisy_oracle(truth, 0, 8, 14, 0.1, 0.5, rng);
        for (double y : e.y_hat) {
            REQUIRE(y >= 0.0);
            REQUIRE(y <= 1.0);
            sum += y;
        }
    }
    const double expected = 0.1 / std::sqrt(2.0 * M_PI);
    CHECK(expected == doctest::Approx(0.0399).epsilon(0.01));
    CHECK(sum / (n * 15.0) == doctest::Approx(expected).epsilon(0.02));

    for (int i = 0; i < 2000; ++i) {
        for (double y : predict_noisy_oracle(truth, 1, 6, 14, 0.15, 0.8, rng).y_hat) {
            REQUIRE(y >= 0.0);
            REQUIRE(y <= 1.0);
        }
    }
}

TEST_CASE("pct policy") {
    const auto t = RiskThresholds::equal_width();
    const PsiTable psi = default_psi_table();
    std::vector<ContactDay> book(15);
    book[0] = {1, 2};
    book[4] = {3};
    const auto own = tokens_for(15, 900);
    const std::vector<std::optional<double>> none(15, std::nullopt);

    SUBCASE("floor and ceiling of the psi table") {
        InfectiousnessEstimate low{std::vector<double>(15, 0.0)};
        CHECK(policy_pct(low, none, book, own, t, psi, 10).level == 1);
        InfectiousnessEstimate high{std::vector<double>(15, 1.0)};
        CHECK(policy_pct(high, none, book, own, t, psi, 10).level == 4);
    }
    SUBCASE("unchanged quantized history is silent") {
        InfectiousnessEstimate e{std::vector<double>(15, 0.3)};
        const std::vector<std::optional<double>> prev(15, 0.3);
        CHECK(policy_pct(e, prev, book, own, t, psi, 10).messages.empty());
        CHECK(policy_pct(e, none, book, own, t, psi, 10).messages.size() == 3);
    }
    SUBCASE("missing estimate falls back to level 1") {
        const auto d = policy_pct(std::nullopt, none, book, own, t, psi, 10);
        CHECK(d.level == 1);
        CHECK(d.messages.empty());
        CHECK_FALSE(d.estimate.has_value());
    }
    SUBCASE("psi is monotone") {
        for (std::size_t r = 1; r < psi.size(); ++r) CHECK(psi[r] >= psi[r - 1]);
        CHECK(psi.front() == 1);
        CHECK(psi.back() == 4);
    }
}

TEST_CASE("evaluate predictor") {
    const std::vector<std::vector<double>> targets = {{0.1, 0.2}, {0.0, 0.7}};
    CHECK(evaluate_predictor(targets, targets) == 0.0);

    const std::vector<std::vector<double>> zeros(3, std::vector<double>(15, 0.0));
    CHECK(evaluate_predictor(zeros, zeros) == 0.0);

    const std::vector<std::vector<double>> zero14(1, std::vector<double>(14, 0.0));
    const std::vector<std::vector<double>> half14(1, std::vector<double>(14, 0.5));
    CHECK(evaluate_predictor(zero14, half14) == doctest::Approx(0.25));

    CHECK_THROWS_AS(evaluate_predictor(targets, zeros), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_predictor(zero14, zeros), std::invalid_argument);
}

TEST_CASE("observables assembly") {
    std::vector<HealthStatus> history(6);  // days 1..6
    history[5].reported_symptoms.insert(Symptom::Cough);
    ClusteredEncounters enc;
    enc.by_day[5] = {{RiskLevel(3), 2}};
    const Observables o = build_observables(HealthProfile{}, 6, 14, history, 1, enc);
    REQUIRE(o.slots.size() == 15);
    CHECK(o.slots[0]->health.reported_symptoms.contains(Symptom::Cough));
    CHECK(o.slots[1]->encounters == std::vector<EncounterCluster>{{RiskLevel(3), 2}});
    CHECK(o.slots[5].has_value());
    for (std::size_t k = 6; k < 15; ++k) CHECK_FALSE(o.slots[k].has_value());
}

TEST_CASE("external predictor round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pct_external_test";
    fs::remove_all(dir);
    CourseTable truth;
    Rng rng(1);
    std::vector<Observables> obs = {empty_obs(3), empty_obs(4)};
    const std::vector<PredictionRequest> requests = {{0, &obs[0]}, {1, &obs[1]}};

    ExternalPredictor good(std::string(TRACE_SIM_BIN) + " echo-targets --records {in} --out {out}", dir.string(),
                           "t", 14);
    const auto out = good.predict(requests, truth, rng);
    REQUIRE(out.size() == 2);
    for (const auto& e : out) {
        REQUIRE(e.has_value());
        CHECK(e->y_hat == std::vector<double>(15, 0.0));
    }

    ExternalPredictor failing("false", dir.string(), "t", 14);
    for (const auto& e : failing.predict(requests, truth, rng)) CHECK_FALSE(e.has_value());
    fs::remove_all(dir);
}
