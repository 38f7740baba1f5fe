#pragma once

#include <span>
#include <vector>

#include "pct/rng.hpp"
#include "pct/types.hpp"

namespace pct {

/// Recommendation level zeta: 0 (pre-pandemic) .. 4 (quarantine).
using RecommendationLevel = int;
inline constexpr RecommendationLevel kMinLevel = 0;
inline constexpr RecommendationLevel kQuarantineLevel = 4;

struct LocationParams {
    LocationType type;
    double mean_contacts;  // pre-confinement daily contacts C_l
    double reduction;      // post-confinement reduction alpha_l
};

/// Pre-confinement contact rates and post-confinement reductions per location.
inline constexpr std::array<LocationParams, kNumLocationTypes> kLocationTable = {{
    {LocationType::Household, 2.7, 0.30},
    {LocationType::Workplace, 10.0, 0.80},
    {LocationType::School, 6.0, 0.80},
    {LocationType::Other, 3.1, 0.50},
}};

const LocationParams& location_params(LocationType type);

/// Expected daily contacts an agent initiates at `loc` under `level`.
/// Throws std::invalid_argument for levels outside 0..4.
double effective_contacts(const LocationParams& loc, RecommendationLevel level, double mobility_scale);

struct Encounter {
    Day day = 0;
    AgentId a = 0;  // initiator
    AgentId b = 0;  // partner
    LocationType location = LocationType::Other;

    friend bool operator==(const Encounter&, const Encounter&) = default;
};

/// Membership pools the encounter generator samples partners from.
struct ContactPools {
    std::vector<std::uint32_t> household_of;           // per agent
    std::vector<std::vector<AgentId>> households;      // members per household
    std::vector<std::int32_t> group_of;                // per agent, -1 if none
    std::vector<std::vector<AgentId>> groups;          // members per workplace/school
    std::vector<LocationType> group_type;              // Workplace or School per group

    std::size_t population() const { return household_of.size(); }
};

/// One Poisson draw per (agent, location, day); partners sampled uniformly
/// from the location pool excluding the agent. A partner at the quarantine
/// level vetoes the encounter. `levels` holds every agent's level for the day.
std::vector<Encounter> generate_encounters(const ContactPools& pools,
                                           std::span<const RecommendationLevel> levels,
                                           double mobility_scale, Day day, Rng& rng);

}  // namespace pct
