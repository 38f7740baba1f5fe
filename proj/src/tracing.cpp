#include "pct/tracing.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "pct/schema.hpp"

namespace pct {

Observables build_observables(const HealthProfile& profile, Day today, int d_max,
                              std::span<const HealthStatus> history, Day history_start,
                              const ClusteredEncounters& encounters) {
    Observables obs;
    obs.profile = profile;
    obs.day = today;
    obs.slots.resize(static_cast<std::size_t>(d_max) + 1);
    for (int k = 0; k <= d_max; ++k) {
        const Day day = today - k;
        if (day < history_start) continue;
        const auto idx = static_cast<std::size_t>(day - history_start);
        if (idx >= history.size()) continue;
        DaySlot slot;
        slot.health = history[idx];
        if (const auto it = encounters.by_day.find(day); it != encounters.by_day.end()) {
            slot.encounters = it->second;
        }
        obs.slots[static_cast<std::size_t>(k)] = std::move(slot);
    }
    return obs;
}

InfectiousnessEstimate predict_oracle(const GroundTruth& truth, AgentId agent, Day day, int d_max) {
    InfectiousnessEstimate est;
    est.y_hat.reserve(static_cast<std::size_t>(d_max) + 1);
    for (int k = 0; k <= d_max; ++k) est.y_hat.push_back(truth.infectiousness(agent, day - k));
    return est;
}

InfectiousnessEstimate predict_noisy_oracle(const GroundTruth& truth, AgentId agent, Day day, int d_max,
                                            double add_sigma, double mul_sigma, Rng& rng) {
    InfectiousnessEstimate est = predict_oracle(truth, agent, day, d_max);
    for (double& y : est.y_hat) {
        const double mul = rng.normal(0.0, mul_sigma);
        const double add = rng.normal(0.0, add_sigma);
        y = std::clamp(y * (1.0 + mul) + add, 0.0, 1.0);
    }
    return est;
}

std::vector<std::optional<InfectiousnessEstimate>> OraclePredictor::predict(
    std::span<const PredictionRequest> requests, const GroundTruth& truth, Rng&) {
    std::vector<std::optional<InfectiousnessEstimate>> out;
    out.reserve(requests.size());
    for (const auto& r : requests) out.emplace_back(predict_oracle(truth, r.agent, r.observables->day, d_max_));
    return out;
}

std::vector<std::optional<InfectiousnessEstimate>> NoisyOraclePredictor::predict(
    std::span<const PredictionRequest> requests, const GroundTruth& truth, Rng& rng) {
    std::vector<std::optional<InfectiousnessEstimate>> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
        out.emplace_back(
            predict_noisy_oracle(truth, r.agent, r.observables->day, d_max_, add_sigma_, mul_sigma_, rng));
    }
    return out;
}

ExternalPredictor::ExternalPredictor(std::string command, std::string work_dir, std::string run_id, int d_max)
    : command_(std::move(command)), work_dir_(std::move(work_dir)), run_id_(std::move(run_id)), d_max_(d_max) {}

std::vector<std::optional<InfectiousnessEstimate>> ExternalPredictor::predict(
    std::span<const PredictionRequest> requests, const GroundTruth&, Rng&) {
    namespace fs = std::filesystem;
    std::vector<std::optional<InfectiousnessEstimate>> out(requests.size());
    if (requests.empty()) return out;

    const fs::path dir = work_dir_.empty() ? fs::temp_directory_path() : fs::path(work_dir_);
    fs::create_directories(dir);
    const std::string stem = run_id_ + "_" + std::to_string(calls_++);
    const fs::path in_path = dir / (stem + "_observables.jsonl");
    const fs::path out_path = dir / (stem + "_predictions.jsonl");
    {
        std::ofstream os(in_path);
        for (std::size_t i = 0; i < requests.size(); ++i) {
            schema::write_jsonl_line(os, schema::request_to_json(run_id_, i, *requests[i].observables));
        }
        if (!os) {
            std::cerr << "external predictor: cannot write " << in_path << "\n";
            return out;
        }
    }
    std::string cmd = command_;
    const std::string quoted_in = "'" + in_path.string() + "'";
    const std::string quoted_out = "'" + out_path.string() + "'";
    const auto in_at = cmd.find("{in}");
    const auto out_at = cmd.find("{out}");
    if (in_at == std::string::npos || out_at == std::string::npos) {
        cmd += " " + quoted_in + " " + quoted_out;
    } else if (in_at < out_at) {
        cmd.replace(out_at, 5, quoted_out).replace(in_at, 4, quoted_in);
    } else {
        cmd.replace(in_at, 4, quoted_in).replace(out_at, 5, quoted_out);
    }
    if (std::system(cmd.c_str()) != 0) {
        std::cerr << "external predictor: command failed: " << cmd << "\n";
        return out;
    }
    try {
        for (const auto& j : schema::read_jsonl_file(out_path.string())) {
            schema::Prediction p = schema::prediction_from_json(j);
            if (p.record_id >= requests.size()) continue;
            if (p.y_hat.size() != static_cast<std::size_t>(d_max_) + 1) continue;
            for (double& y : p.y_hat) y = std::clamp(y, 0.0, 1.0);
            out[p.record_id] = InfectiousnessEstimate{std::move(p.y_hat)};
        }
    } catch (const std::exception& e) {
        std::cerr << "external predictor: " << e.what() << "\n";
        std::fill(out.begin(), out.end(), std::nullopt);
    }
    std::error_code ec;
    fs::remove(in_path, ec);
    fs::remove(out_path, ec);
    return out;
}

RecommendationLevel policy_no_tracing() { return kBaselineLevel; }

BctDecision policy_bct(BctState& state, const HealthStatus& today_status,
                       std::span<const RiskMessage> newly_received, std::span<const ContactDay> contact_book,
                       std::span<const Token> own_tokens, Day today, RecommendationLevel quarantine_level) {
    BctDecision decision;
    const TestResult& test = today_status.test_result;
    if (test.kind == TestResult::Kind::Positive && !state.broadcast_done) {
        state.broadcast_done = true;
        state.quarantine_until = std::max(state.quarantine_until.value_or(today), today + kBctQuarantineDays);
        const std::size_t window = std::min<std::size_t>(contact_book.size(), kBctWindowDays + 1);
        for (std::size_t k = 0; k < window; ++k) {
            const std::set<Token> distinct(contact_book[k].begin(), contact_book[k].end());
            for (const Token partner : distinct) {
                decision.messages.push_back(
                    OutgoingMessage{partner, RiskMessage{own_tokens[k], today - static_cast<Day>(k), kPositiveFlag}});
            }
        }
    }
    const bool flagged = std::any_of(newly_received.begin(), newly_received.end(),
                                     [](const RiskMessage& m) { return m.level == kPositiveFlag; });
    if (flagged) {
        state.quarantine_until = std::max(state.quarantine_until.value_or(today), today + kBctQuarantineDays);
    }
    decision.level = (state.quarantine_until && today <= *state.quarantine_until) ? quarantine_level
                                                                                  : kBaselineLevel;
    return decision;
}

HeuristicDecision policy_heuristic(const Observables& obs, const HeuristicLadder& ladder) {
    HeuristicDecision decision;
    decision.estimate.y_hat.assign(obs.slots.size(), 0.0);

    bool positive = false;
    bool negative = false;
    int max_risk = 0;
    std::vector<int> day_risk(obs.slots.size(), 0);
    const Day oldest = obs.day - static_cast<Day>(obs.slots.size()) + 1;
    for (std::size_t k = 0; k < obs.slots.size(); ++k) {
        if (!obs.slots[k]) continue;
        const TestResult& test = obs.slots[k]->health.test_result;
        const bool recent = test.day >= oldest;
        positive = positive || (recent && test.kind == TestResult::Kind::Positive);
        negative = negative || (recent && test.kind == TestResult::Kind::Negative);
        for (const auto& c : obs.slots[k]->encounters) day_risk[k] = std::max(day_risk[k], c.level.value());
        max_risk = std::max(max_risk, day_risk[k]);
    }
    const int symptoms_today = obs.slots.empty() || !obs.slots[0] ? 0 : obs.slots[0]->health.reported_symptoms.size();

    if (positive) {
        std::fill(decision.estimate.y_hat.begin(), decision.estimate.y_hat.end(), ladder.positive_y);
        decision.level = kQuarantineLevel;
        return decision;
    }

    RecommendationLevel level = kBaselineLevel;
    if (symptoms_today >= ladder.symptoms_for_high || max_risk >= ladder.risk_for_high) {
        level = 3;
    } else if (max_risk >= ladder.risk_for_medium) {
        level = 2;
    } else if (symptoms_today > 0 || max_risk >= ladder.risk_for_low) {
        level = std::max(level, symptoms_today > 0 ? 2 : 1);
    }
    decision.level = level;

    for (std::size_t k = 0; k < obs.slots.size(); ++k) {
        if (!obs.slots[k]) continue;
        const int n_symptoms = obs.slots[k]->health.reported_symptoms.size();
        const double symptom_score = std::min(ladder.max_symptom_y, ladder.symptom_y * n_symptoms);
        const double risk_score = ladder.risk_y * day_risk[k] / static_cast<double>(RiskLevel::kMax);
        double y = std::max(symptom_score, risk_score);
        if (negative) y *= ladder.negative_test_factor;
        decision.estimate.y_hat[k] = std::clamp(y, 0.0, 1.0);
    }
    return decision;
}

PsiTable default_psi_table() {
    PsiTable psi{};
    for (int level = 0; level < RiskLevel::kCount; ++level) {
        psi[static_cast<std::size_t>(level)] = level < kPsiQuarantineFrom ? kBaselineLevel : kQuarantineLevel;
    }
    return psi;
}

PctDecision policy_pct(const std::optional<InfectiousnessEstimate>& estimate,
                       std::span<const std::optional<double>> previous,
                       std::span<const ContactDay> contact_book, std::span<const Token> own_tokens,
                       const RiskThresholds& thresholds, const PsiTable& psi, Day today) {
    PctDecision decision;
    if (!estimate) return decision;
    decision.estimate = estimate;
    const RiskLevel today_level = quantize_risk(estimate->today(), thresholds);
    decision.level = psi[static_cast<std::size_t>(today_level.value())];
    decision.messages = diff_and_emit(previous, estimate->y_hat, contact_book, own_tokens, thresholds, today);
    return decision;
}

double evaluate_predictor(std::span<const std::vector<double>> targets,
                          std::span<const std::vector<double>> predictions) {
    if (targets.size() != predictions.size()) {
        throw std::invalid_argument("evaluate_predictor: " + std::to_string(targets.size()) + " targets vs " +
                                    std::to_string(predictions.size()) + " predictions");
    }
    if (targets.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& y = targets[i];
        const auto& p = predictions[i];
        if (y.size() != p.size() || y.empty()) {
            throw std::invalid_argument("evaluate_predictor: window length mismatch at record " + std::to_string(i));
        }
        double se = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) se += (y[k] - p[k]) * (y[k] - p[k]);
        total += se / static_cast<double>(y.size());
    }
    return total / static_cast<double>(targets.size());
}

}  // namespace pct
