#include "pct/types.hpp"

namespace pct {

std::string_view to_string(EpiState s) {
    switch (s) {
        case EpiState::Susceptible: return "S";
        case EpiState::Exposed: return "E";
        case EpiState::Infectious: return "I";
        case EpiState::Recovered: return "R";
    }
    return "?";
}

std::string_view to_string(LocationType l) {
    switch (l) {
        case LocationType::Household: return "household";
        case LocationType::Workplace: return "workplace";
        case LocationType::School: return "school";
        case LocationType::Other: return "other";
    }
    return "?";
}

std::string_view to_string(AgeBand a) {
    switch (a) {
        case AgeBand::Child: return "child";
        case AgeBand::Adult: return "adult";
        case AgeBand::Senior: return "senior";
    }
    return "?";
}

std::string_view to_string(Sex s) { return s == Sex::Female ? "female" : "male"; }

std::string_view to_string(Symptom s) {
    switch (s) {
        case Symptom::Fever: return "fever";
        case Symptom::Cough: return "cough";
        case Symptom::Fatigue: return "fatigue";
        case Symptom::Anosmia: return "anosmia";
        case Symptom::Other: return "other";
    }
    return "?";
}

std::string_view to_string(TestResult::Kind k) {
    switch (k) {
        case TestResult::Kind::None: return "none";
        case TestResult::Kind::Pending: return "pending";
        case TestResult::Kind::Positive: return "positive";
        case TestResult::Kind::Negative: return "negative";
    }
    return "?";
}

std::string_view condition_name(std::size_t bit) {
    switch (bit) {
        case 0: return "cardiovascular";
        case 1: return "diabetes";
        case 2: return "immunocompromised";
        default: return "?";
    }
}

}  // namespace pct
