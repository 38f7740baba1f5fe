#include "pct/virology.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pct {

namespace {

// Per-symptom expression probability for symptomatic courses.
constexpr std::array<double, kNumSymptoms> kSymptomPrevalence = {0.6, 0.55, 0.5, 0.3, 0.3};

}  // namespace

DiseaseCourse sample_disease_course(Day exposure_day, Rng& rng) {
    using namespace virology;
    DiseaseCourse c;
    c.exposure_day = exposure_day;

    // LogNormal parameterized so that its mean is kMeanIncubation.
    const double log_mean = std::log(kMeanIncubation) - 0.5 * kIncubationLogSd * kIncubationLogSd;
    c.symptom_onset = std::max(kMinIncubation, rng.lognormal(log_mean, kIncubationLogSd));
    c.peak = c.symptom_onset - kPeakBeforeSymptoms;

    const double onset = rng.normal(kMeanInfectiousnessOnset, kInfectiousnessOnsetSd);
    c.infectiousness_onset = std::clamp(onset, kMinInfectiousnessOnset, c.peak - kMinOnsetToPeak);

    const double to_recovery = rng.normal(kMeanRecoveryAfterSymptoms, kRecoveryAfterSymptomsSd);
    c.recovery = c.symptom_onset + std::max(kMinRecoveryAfterSymptoms, to_recovery);

    c.peak_evl = rng.uniform(kMinPeakEvl, kMaxPeakEvl);
    c.asymptomatic = rng.bernoulli(kAsymptomaticProbability);

    for (std::size_t s = 0; s < kNumSymptoms; ++s) {
        if (rng.bernoulli(kSymptomPrevalence[s])) c.symptoms.insert(static_cast<Symptom>(s));
    }
    if (c.symptoms.empty()) c.symptoms.insert(Symptom::Fever);
    return c;
}

double effective_viral_load(const DiseaseCourse& c, double t) {
    if (t <= c.infectiousness_onset || t >= c.recovery) return 0.0;
    if (t <= c.peak) {
        return c.peak_evl * (t - c.infectiousness_onset) / (c.peak - c.infectiousness_onset);
    }
    return c.peak_evl * (c.recovery - t) / (c.recovery - c.peak);
}

double ground_truth_infectiousness(const std::optional<DiseaseCourse>& course, Day day) {
    if (!course || day < course->exposure_day) return 0.0;
    return effective_viral_load(*course, course->time_at(day));
}

EpiState epi_state_on(const DiseaseCourse& c, Day day) {
    const double t = c.time_at(day);
    if (t < c.infectiousness_onset) return EpiState::Exposed;
    if (t < c.recovery) return EpiState::Infectious;
    return EpiState::Recovered;
}

bool has_true_symptoms(const DiseaseCourse& c, Day day) {
    if (c.asymptomatic) return false;
    const double t = c.time_at(day);
    return t >= c.symptom_onset && t < c.recovery;
}

std::optional<Day> first_symptomatic_day(const DiseaseCourse& c) {
    if (c.asymptomatic) return std::nullopt;
    // Smallest day with day - exposure + 0.5 >= symptom_onset.
    const Day day = c.exposure_day + static_cast<Day>(std::ceil(c.symptom_onset - 0.5));
    if (!has_true_symptoms(c, day)) return std::nullopt;
    return day;
}

double transmission_probability(double infector_evl, double base_rate, double mobility_env,
                                double carefulness) {
    const double p = base_rate * infector_evl * mobility_env *
                     (1.0 - virology::kCarefulnessEffect * carefulness);
    return std::clamp(p, 0.0, 1.0);
}

bool transmission_trial(double infector_evl, double base_rate, double mobility_env,
                        double carefulness, Rng& rng) {
    return rng.bernoulli(transmission_probability(infector_evl, base_rate, mobility_env, carefulness));
}

SymptomSet report_symptoms(const std::optional<DiseaseCourse>& course, Day day,
                           const SymptomNoise& noise, Rng& rng) {
    SymptomSet reported;
    if (course && has_true_symptoms(*course, day)) {
        for (std::size_t s = 0; s < kNumSymptoms; ++s) {
            const auto sym = static_cast<Symptom>(s);
            if (course->symptoms.contains(sym) && !rng.bernoulli(noise.dropout)) reported.insert(sym);
        }
    }
    if (rng.bernoulli(noise.dropin)) {
        reported.insert(static_cast<Symptom>(rng.index(kNumSymptoms)));
    }
    return reported;
}

TestResult TestRecord::known_on(Day day) const {
    if (!order_day || day < *order_day) return TestResult::none();
    if (day < result_day) return TestResult::pending_since(*order_day);
    return positive ? TestResult::positive(result_day) : TestResult::negative(result_day);
}

bool maybe_order_test(const std::optional<DiseaseCourse>& course, Day day,
                      const TestingParams& params, TestRecord& record, Rng& rng) {
    if (record.order_day || !course) return false;
    const auto first = first_symptomatic_day(*course);
    if (!first || *first != day) return false;
    if (!rng.bernoulli(params.order_probability)) return false;
    record.order_day = day;
    record.result_day = day + params.delay_days;
    record.positive = !rng.bernoulli(params.false_negative_rate);
    return true;
}

HealthStatus update_health_status(const std::optional<DiseaseCourse>& course, const TestRecord& test,
                                  Day day, const SymptomNoise& noise, Rng& rng) {
    return HealthStatus{report_symptoms(course, day, noise, rng), test.known_on(day)};
}

}  // namespace pct
