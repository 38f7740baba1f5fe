#include "pct/messaging.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <stdexcept>
#include <string>
#include <utility>

namespace pct {

RiskLevel::RiskLevel(int level) {
    if (level < 0 || level > kMax) {
        throw std::out_of_range("risk level out of range: " + std::to_string(level));
    }
    value_ = static_cast<std::uint8_t>(level);
}

RiskThresholds RiskThresholds::equal_width() {
    RiskThresholds t;
    for (std::size_t k = 0; k < kCuts; ++k) {
        t.cuts[k] = static_cast<double>(k + 1) / static_cast<double>(RiskLevel::kCount);
    }
    return t;
}

RiskThresholds calibrate_thresholds(std::span<const double> samples) {
    if (samples.size() < static_cast<std::size_t>(RiskLevel::kCount)) {
        throw std::invalid_argument("calibrate_thresholds needs at least 16 samples, got " +
                                    std::to_string(samples.size()));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    for (double s : sorted) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::invalid_argument("calibration sample outside [0, 1]: " + std::to_string(s));
        }
    }
    std::sort(sorted.begin(), sorted.end());

    // cut_k = sorted[ceil(k n / 16) - 1], so that bin j = (cut_j, cut_{j+1}]
    // receives ceil((j+1) n/16) - ceil(j n/16) samples.
    const std::size_t n = sorted.size();
    RiskThresholds t;
    for (std::size_t k = 1; k <= RiskThresholds::kCuts; ++k) {
        const std::size_t rank = (k * n + RiskLevel::kCount - 1) / RiskLevel::kCount;
        t.cuts[k - 1] = sorted[rank - 1];
    }
    for (std::size_t k = 1; k < RiskThresholds::kCuts; ++k) {
        t.cuts[k] = std::max(t.cuts[k], t.cuts[k - 1] + kThresholdEpsilon);
    }
    return t;
}

RiskLevel quantize_risk(double y_hat, const RiskThresholds& thresholds) {
    const auto below = std::lower_bound(thresholds.cuts.begin(), thresholds.cuts.end(), y_hat);
    return RiskLevel(static_cast<int>(below - thresholds.cuts.begin()));
}

WireRecord encode_wire(const RiskMessage& msg, Day today) {
    const Day offset = today - msg.encounter_day;
    if (offset < 0 || offset > 15) {
        throw std::out_of_range("day offset does not fit in 4 bits: " + std::to_string(offset));
    }
    WireRecord w{};
    for (std::size_t i = 0; i < 8; ++i) {
        w[i] = static_cast<std::uint8_t>((msg.sender_token >> (8 * i)) & 0xFFU);
    }
    w[8] = static_cast<std::uint8_t>((static_cast<unsigned>(offset) << 4) |
                                     static_cast<unsigned>(msg.level.value()));
    return w;
}

RiskMessage decode_wire(const WireRecord& w, Day today) {
    RiskMessage m;
    for (std::size_t i = 0; i < 8; ++i) {
        m.sender_token |= static_cast<Token>(w[i]) << (8 * i);
    }
    m.encounter_day = today - static_cast<Day>(w[8] >> 4);
    m.level = RiskLevel(w[8] & 0x0F);
    return m;
}

std::vector<OutgoingMessage> diff_and_emit(std::span<const std::optional<double>> previous,
                                           std::span<const double> current,
                                           std::span<const ContactDay> contact_book,
                                           std::span<const Token> own_tokens,
                                           const RiskThresholds& thresholds, Day today) {
    if (previous.size() != current.size() || contact_book.size() != current.size() ||
        own_tokens.size() != current.size()) {
        throw std::invalid_argument("diff_and_emit: window spans must have equal length");
    }
    std::vector<OutgoingMessage> out;
    for (std::size_t k = 0; k < current.size(); ++k) {
        if (contact_book[k].empty()) continue;
        const RiskLevel level = quantize_risk(current[k], thresholds);
        if (previous[k] && quantize_risk(*previous[k], thresholds) == level) continue;
        const Day day = today - static_cast<Day>(k);
        for (const Token partner : contact_book[k]) {
            out.push_back(OutgoingMessage{partner, RiskMessage{own_tokens[k], day, level}});
        }
    }
    return out;
}

std::size_t ClusteredEncounters::total_repeats() const {
    std::size_t total = 0;
    for (const auto& [day, clusters] : by_day) {
        for (const auto& c : clusters) total += c.repeats;
    }
    return total;
}

ClusteredEncounters cluster_inbox(std::span<const RiskMessage> inbox) {
    // (day, level, token) -> count; the token never leaves this function.
    std::map<std::tuple<Day, int, Token>, std::uint32_t> groups;
    for (const auto& m : inbox) ++groups[{m.encounter_day, m.level.value(), m.sender_token}];

    ClusteredEncounters out;
    for (const auto& [key, count] : groups) {
        const auto& [day, level, token] = key;
        out.by_day[day].push_back(EncounterCluster{RiskLevel(level), count});
    }
    return out;
}

std::vector<RiskMessage> Mailbox::drain(Day oldest_day) {
    std::set<std::pair<Token, Day>> refreshed;
    for (const auto& m : pending_) refreshed.emplace(m.sender_token, m.encounter_day);

    std::erase_if(visible_, [&](const RiskMessage& m) {
        return m.encounter_day < oldest_day || refreshed.contains({m.sender_token, m.encounter_day});
    });
    std::vector<RiskMessage> merged;
    merged.reserve(pending_.size());
    for (const auto& m : pending_) {
        if (m.encounter_day >= oldest_day) merged.push_back(m);
    }
    visible_.insert(visible_.end(), merged.begin(), merged.end());
    pending_.clear();
    return merged;
}

}  // namespace pct
