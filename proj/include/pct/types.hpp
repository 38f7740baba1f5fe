#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

namespace pct {

using AgentId = std::uint32_t;
using Day = std::int32_t;
using Token = std::uint64_t;

/// Infector id used for infections introduced at initialization.
inline constexpr AgentId kExternalSeed = std::numeric_limits<AgentId>::max();

enum class EpiState : std::uint8_t { Susceptible, Exposed, Infectious, Recovered };

enum class LocationType : std::uint8_t { Household, Workplace, School, Other };
inline constexpr std::size_t kNumLocationTypes = 4;
inline constexpr std::array<LocationType, kNumLocationTypes> kAllLocationTypes = {
    LocationType::Household, LocationType::Workplace, LocationType::School, LocationType::Other};

enum class AgeBand : std::uint8_t { Child, Adult, Senior };
enum class Sex : std::uint8_t { Female, Male };

/// Pre-existing condition flags carried in the health profile.
enum Condition : std::uint8_t {
    kCardiovascular = 1U << 0,
    kDiabetes = 1U << 1,
    kImmunocompromised = 1U << 2,
};
inline constexpr std::size_t kNumConditions = 3;

/// Demographic health profile (g_i). Static for the agent's lifetime.
struct HealthProfile {
    AgeBand age = AgeBand::Adult;
    Sex sex = Sex::Female;
    std::uint8_t conditions = 0;

    friend bool operator==(const HealthProfile&, const HealthProfile&) = default;
};

enum class Symptom : std::uint8_t { Fever, Cough, Fatigue, Anosmia, Other };
inline constexpr std::size_t kNumSymptoms = 5;

class SymptomSet {
public:
    constexpr SymptomSet() = default;
    constexpr explicit SymptomSet(std::uint8_t bits) : bits_(bits & kMask) {}

    constexpr bool contains(Symptom s) const { return (bits_ >> static_cast<unsigned>(s)) & 1U; }
    constexpr void insert(Symptom s) { bits_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(s)); }
    constexpr void erase(Symptom s) { bits_ &= static_cast<std::uint8_t>(~(1U << static_cast<unsigned>(s))); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return __builtin_popcount(bits_); }
    constexpr std::uint8_t bits() const { return bits_; }

    friend constexpr bool operator==(SymptomSet, SymptomSet) = default;

private:
    static constexpr std::uint8_t kMask = (1U << kNumSymptoms) - 1U;
    std::uint8_t bits_ = 0;
};

/// Test state as known to the agent on a given day. `day` is the order day for
/// Pending and the result day for Positive/Negative.
struct TestResult {
    enum class Kind : std::uint8_t { None, Pending, Positive, Negative };
    Kind kind = Kind::None;
    Day day = 0;

    static constexpr TestResult none() { return {}; }
    static constexpr TestResult pending_since(Day d) { return {Kind::Pending, d}; }
    static constexpr TestResult positive(Day d) { return {Kind::Positive, d}; }
    static constexpr TestResult negative(Day d) { return {Kind::Negative, d}; }

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// Per-day health status (h_i^d): reported symptoms and known test result.
struct HealthStatus {
    SymptomSet reported_symptoms;
    TestResult test_result;

    friend bool operator==(const HealthStatus&, const HealthStatus&) = default;
};

struct InfectionEvent {
    Day day = 0;
    AgentId infector = kExternalSeed;
    AgentId infectee = 0;
    std::optional<LocationType> location;  // empty for seeded infections

    bool is_seed() const { return infector == kExternalSeed; }
    friend bool operator==(const InfectionEvent&, const InfectionEvent&) = default;
};

std::string_view to_string(EpiState s);
std::string_view to_string(LocationType l);
std::string_view to_string(AgeBand a);
std::string_view to_string(Sex s);
std::string_view to_string(Symptom s);
std::string_view to_string(TestResult::Kind k);
std::string_view condition_name(std::size_t bit);

}  // namespace pct
