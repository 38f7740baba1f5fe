#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pct/messaging.hpp"
#include "pct/mobility.hpp"
#include "pct/rng.hpp"
#include "pct/types.hpp"

namespace pct {

/// Observations of one app user for one calendar day of the window.
struct DaySlot {
    HealthStatus health;
    std::vector<EncounterCluster> encounters;

    friend bool operator==(const DaySlot&, const DaySlot&) = default;
};

/// O_i^d: profile plus d_max+1 day slots, newest first (slot k is day d-k).
/// Slots for days before the agent enrolled are empty.
struct Observables {
    HealthProfile profile;
    Day day = 0;
    std::vector<std::optional<DaySlot>> slots;

    friend bool operator==(const Observables&, const Observables&) = default;
};

/// Assembles observables from a per-day health history (indexed by calendar
/// day, starting at `history_start`) and the clustered inbox.
Observables build_observables(const HealthProfile& profile, Day today, int d_max,
                              std::span<const HealthStatus> history, Day history_start,
                              const ClusteredEncounters& encounters);

/// Predicted infectiousness history, newest first, each component in [0, 1].
struct InfectiousnessEstimate {
    std::vector<double> y_hat;

    double today() const { return y_hat.empty() ? 0.0 : y_hat.front(); }
    friend bool operator==(const InfectiousnessEstimate&, const InfectiousnessEstimate&) = default;
};

/// Simulator-side access to ground truth. Only in-simulation oracles use it;
/// nothing from it is placed on the wire.
class GroundTruth {
public:
    virtual ~GroundTruth() = default;
    virtual double infectiousness(AgentId agent, Day day) const = 0;
};

struct PredictionRequest {
    AgentId agent = 0;
    const Observables* observables = nullptr;
};

/// Batch infectiousness predictor. An empty optional for a request means the
/// predictor failed for that agent.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<std::optional<InfectiousnessEstimate>> predict(
        std::span<const PredictionRequest> requests, const GroundTruth& truth, Rng& rng) = 0;
};

InfectiousnessEstimate predict_oracle(const GroundTruth& truth, AgentId agent, Day day, int d_max);

/// clamp(y (1 + eps_m) + eps_a, 0, 1) with fresh Gaussian noise per component.
InfectiousnessEstimate predict_noisy_oracle(const GroundTruth& truth, AgentId agent, Day day, int d_max,
                                            double add_sigma, double mul_sigma, Rng& rng);

class OraclePredictor final : public Predictor {
public:
    explicit OraclePredictor(int d_max) : d_max_(d_max) {}
    std::vector<std::optional<InfectiousnessEstimate>> predict(std::span<const PredictionRequest> requests,
                                                               const GroundTruth& truth, Rng& rng) override;

private:
    int d_max_;
};

class NoisyOraclePredictor final : public Predictor {
public:
    NoisyOraclePredictor(int d_max, double add_sigma, double mul_sigma)
        : d_max_(d_max), add_sigma_(add_sigma), mul_sigma_(mul_sigma) {}
    std::vector<std::optional<InfectiousnessEstimate>> predict(std::span<const PredictionRequest> requests,
                                                               const GroundTruth& truth, Rng& rng) override;

private:
    int d_max_;
    double add_sigma_;
    double mul_sigma_;
};

/// Batch file exchange with an external program. Each call writes the
/// requests as observables JSONL, runs `<command> <observables> <predictions>`
/// and reads the predictions JSONL back. When the command contains `{in}` and
/// `{out}` the two paths are substituted there instead. Failures yield empty results.
class ExternalPredictor final : public Predictor {
public:
    ExternalPredictor(std::string command, std::string work_dir, std::string run_id, int d_max);
    std::vector<std::optional<InfectiousnessEstimate>> predict(std::span<const PredictionRequest> requests,
                                                               const GroundTruth& truth, Rng& rng) override;

private:
    std::string command_;
    std::string work_dir_;
    std::string run_id_;
    int d_max_;
    int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Policies

inline constexpr RecommendationLevel kBaselineLevel = 1;

RecommendationLevel policy_no_tracing();

/// Binary contact tracing state kept by each app.
struct BctState {
    std::optional<Day> quarantine_until;
    bool broadcast_done = false;
};

inline constexpr Day kBctQuarantineDays = 14;
inline constexpr int kBctWindowDays = 14;
/// BCT reuses the risk wire format; a positive flag is the top risk level.
inline const RiskLevel kPositiveFlag{RiskLevel::kMax};

struct BctDecision {
    RecommendationLevel level = kBaselineLevel;
    std::vector<OutgoingMessage> messages;
};

/// On the first day the own positive result is known: quarantine for 14 days
/// and flag every distinct (day, token) contact of the trailing 14 days. Any
/// newly received flag quarantines for 14 days from today.
BctDecision policy_bct(BctState& state, const HealthStatus& today_status,
                       std::span<const RiskMessage> newly_received, std::span<const ContactDay> contact_book,
                       std::span<const Token> own_tokens, Day today, RecommendationLevel quarantine_level);

/// Thresholds of the rule-based heuristic.
struct HeuristicLadder {
    int symptoms_for_high = 2;   // distinct reported symptoms today => level 3
    int risk_for_high = 12;      // max received risk level => level 3
    int risk_for_medium = 8;     // => level 2
    int risk_for_low = 4;        // => level 1, or 2 when symptomatic
    double positive_y = 0.9;     // y_hat on every day after a positive test
    double symptom_y = 0.2;      // y_hat per distinct reported symptom
    double max_symptom_y = 0.6;
    double risk_y = 0.5;         // y_hat at max received level, scaled linearly
    double negative_test_factor = 0.5;

    friend bool operator==(const HeuristicLadder&, const HeuristicLadder&) = default;
};

struct HeuristicDecision {
    InfectiousnessEstimate estimate;
    RecommendationLevel level = kBaselineLevel;
};

/// Rule ladder:
///   known positive test                              => 4, y_hat = positive_y on all days
///   >= symptoms_for_high symptoms or max risk >= risk_for_high => 3
///   max risk >= risk_for_medium                      => 2
///   any symptom or max risk >= risk_for_low          => 2 if symptomatic else 1
///   otherwise                                        => 1
/// y_hat per day: max(min(max_symptom_y, symptom_y * |symptoms|),
/// risk_y * max_level / 15), scaled by negative_test_factor after a negative result.
HeuristicDecision policy_heuristic(const Observables& obs, const HeuristicLadder& ladder);

/// psi: today's quantized risk level -> recommendation level.
using PsiTable = std::array<RecommendationLevel, RiskLevel::kCount>;
/// Lowest risk level the default table sends to quarantine. Levels 2 and 3
/// allow more contacts than the baseline, so the default table skips them.
inline constexpr int kPsiQuarantineFrom = 4;
PsiTable default_psi_table();

struct PctDecision {
    std::optional<InfectiousnessEstimate> estimate;
    RecommendationLevel level = kBaselineLevel;
    std::vector<OutgoingMessage> messages;
};

/// zeta = psi(quantize(y_hat today)); messages are the quantized diff
/// against `previous`. A missing estimate (predictor failure) falls back to
/// the baseline level and sends nothing.
PctDecision policy_pct(const std::optional<InfectiousnessEstimate>& estimate,
                       std::span<const std::optional<double>> previous,
                       std::span<const ContactDay> contact_book, std::span<const Token> own_tokens,
                       const RiskThresholds& thresholds, const PsiTable& psi, Day today);

/// Mean over records of the per-record window MSE. Throws
/// std::invalid_argument when the record counts or window lengths differ.
double evaluate_predictor(std::span<const std::vector<double>> targets,
                          std::span<const std::vector<double>> predictions);

}  // namespace pct
