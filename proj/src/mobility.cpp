#include "pct/mobility.hpp"

#include <stdexcept>
#include <string>

namespace pct {

const LocationParams& location_params(LocationType type) {
    return kLocationTable[static_cast<std::size_t>(type)];
}

double effective_contacts(const LocationParams& loc, RecommendationLevel level, double mobility_scale) {
    const double post = (1.0 - loc.reduction) * loc.mean_contacts;
    double m = 0.0;
    switch (level) {
        case 0: m = loc.mean_contacts; break;
        case 1: m = 0.25 * post; break;
        case 2: m = 0.5 * post; break;
        case 3: m = post; break;
        case 4: m = 0.0; break;
        default:
            throw std::invalid_argument("recommendation level out of range: " + std::to_string(level));
    }
    return mobility_scale * m;
}

namespace {

void draw_from_pool(std::span<const AgentId> pool, AgentId self, double mean,
                    std::span<const RecommendationLevel> levels, LocationType type, Day day,
                    Rng& rng, std::vector<Encounter>& out) {
    if (pool.size() < 2 || mean <= 0.0) return;
    const std::uint32_t k = rng.poisson(mean);
    for (std::uint32_t i = 0; i < k; ++i) {
        AgentId partner = pool[rng.index(pool.size() - 1)];
        if (partner == self) partner = pool.back();
        if (levels[partner] == kQuarantineLevel) continue;
        out.push_back(Encounter{day, self, partner, type});
    }
}

}  // namespace

std::vector<Encounter> generate_encounters(const ContactPools& pools,
                                           std::span<const RecommendationLevel> levels,
                                           double mobility_scale, Day day, Rng& rng) {
    std::vector<Encounter> out;
    const std::size_t n = pools.population();
    if (mobility_scale <= 0.0 || n < 2) return out;

    for (AgentId a = 0; a < n; ++a) {
        const RecommendationLevel level = levels[a];
        if (level == kQuarantineLevel) continue;

        draw_from_pool(pools.households[pools.household_of[a]], a,
                       effective_contacts(location_params(LocationType::Household), level, mobility_scale),
                       levels, LocationType::Household, day, rng, out);

        if (const std::int32_t g = pools.group_of[a]; g >= 0) {
            const LocationType type = pools.group_type[static_cast<std::size_t>(g)];
            draw_from_pool(pools.groups[static_cast<std::size_t>(g)], a,
                           effective_contacts(location_params(type), level, mobility_scale), levels, type,
                           day, rng, out);
        }

        const std::uint32_t k = rng.poisson(
            effective_contacts(location_params(LocationType::Other), level, mobility_scale));
        for (std::uint32_t i = 0; i < k; ++i) {
            AgentId partner = static_cast<AgentId>(rng.index(n - 1));
            if (partner >= a) ++partner;
            if (levels[partner] == kQuarantineLevel) continue;
            out.push_back(Encounter{day, a, partner, LocationType::Other});
        }
    }
    return out;
}

}  // namespace pct
