#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pct/types.hpp"

namespace pct {

/// Quantized risk, 16 levels (4 bits on the wire).
class RiskLevel {
public:
    static constexpr int kCount = 16;
    static constexpr int kMax = kCount - 1;
    static constexpr int kBits = 4;

    constexpr RiskLevel() = default;
    /// Throws std::out_of_range outside 0..15.
    explicit RiskLevel(int level);

    constexpr int value() const { return value_; }
    friend constexpr auto operator<=>(RiskLevel, RiskLevel) = default;

private:
    std::uint8_t value_ = 0;
};

/// The 15 ascending cut points separating the 16 risk levels.
struct RiskThresholds {
    static constexpr std::size_t kCuts = RiskLevel::kCount - 1;
    std::array<double, kCuts> cuts{};

    /// 16 equal-width bins on [0, 1].
    static RiskThresholds equal_width();
    friend bool operator==(const RiskThresholds&, const RiskThresholds&) = default;
};

/// Spacing used to separate cut points that collapse onto the same value.
inline constexpr double kThresholdEpsilon = 1e-6;

/// Cut points at the empirical k/16 quantiles of `samples`. Runs of equal
/// cut points are spread upwards into an epsilon ladder so the result is
/// strictly increasing. Throws std::invalid_argument for fewer than 16
/// samples or samples outside [0, 1].
RiskThresholds calibrate_thresholds(std::span<const double> samples);

/// Number of cut points strictly below `y_hat`.
RiskLevel quantize_risk(double y_hat, const RiskThresholds& thresholds);

struct RiskMessage {
    Token sender_token = 0;  // sender's rotating token on the encounter day
    Day encounter_day = 0;
    RiskLevel level;

    friend bool operator==(const RiskMessage&, const RiskMessage&) = default;
};

/// Packed wire record: 8-byte little-endian token, then one byte holding
/// the day offset (high nibble) and risk level (low nibble).
inline constexpr std::size_t kWireSize = 9;
using WireRecord = std::array<std::uint8_t, kWireSize>;

/// `today - encounter_day` must lie in 0..15; throws std::out_of_range otherwise.
WireRecord encode_wire(const RiskMessage& msg, Day today);
RiskMessage decode_wire(const WireRecord& record, Day today);

/// A message routed to the holder of `recipient_token`.
struct OutgoingMessage {
    Token recipient_token = 0;
    RiskMessage message;
};

/// Partner tokens recorded for one encounter day, one entry per encounter
/// (repeat encounters appear repeatedly).
using ContactDay = std::vector<Token>;

/// Emits update messages for every window day whose quantized risk changed.
/// All spans are aligned newest-first: index k refers to day `today - k`.
/// A missing previous value means nothing was sent for that day yet, which
/// always triggers a message. `own_tokens[k]` is the sender's token on that day.
std::vector<OutgoingMessage> diff_and_emit(std::span<const std::optional<double>> previous,
                                           std::span<const double> current,
                                           std::span<const ContactDay> contact_book,
                                           std::span<const Token> own_tokens,
                                           const RiskThresholds& thresholds, Day today);

struct EncounterCluster {
    RiskLevel level;
    std::uint32_t repeats = 0;

    friend bool operator==(const EncounterCluster&, const EncounterCluster&) = default;
};

/// Encounter summary e_i: per encounter day, the (risk level, repeat count) multiset.
struct ClusteredEncounters {
    std::map<Day, std::vector<EncounterCluster>> by_day;

    std::size_t total_repeats() const;
    friend bool operator==(const ClusteredEncounters&, const ClusteredEncounters&) = default;
};

/// Groups messages by (encounter day, risk level) and collapses messages
/// that share a sender token within a group into one entry.
ClusteredEncounters cluster_inbox(std::span<const RiskMessage> inbox);

/// Per-agent mailbox. Deliveries land in a pending area and become visible
/// at the next `drain`. A new batch from a token about a given day replaces
/// the earlier messages from that token about that day.
class Mailbox {
public:
    void deliver(const RiskMessage& msg) { pending_.push_back(msg); }

    /// Merges pending batches into the visible inbox and forgets messages
    /// older than `oldest_day`. Returns the merged messages.
    std::vector<RiskMessage> drain(Day oldest_day);

    std::span<const RiskMessage> visible() const { return visible_; }
    bool has_pending() const { return !pending_.empty(); }

private:
    std::vector<RiskMessage> visible_;
    std::vector<RiskMessage> pending_;
};

}  // namespace pct
