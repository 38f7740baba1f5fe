#pragma once

#include "pct/rng.hpp"
#include "pct/types.hpp"

namespace pct {

/// Disease course of one infected agent. All landmark times are in days
/// measured from the exposure instant, which is the start of `exposure_day`.
struct DiseaseCourse {
    Day exposure_day = 0;
    double infectiousness_onset = 0.0;
    double symptom_onset = 0.0;  // incubation period
    double peak = 0.0;
    double recovery = 0.0;
    double peak_evl = 0.0;
    bool asymptomatic = false;
    SymptomSet symptoms;  // symptoms expressed while symptomatic

    /// Days since exposure at the midpoint of `day`.
    double time_at(Day day) const { return static_cast<double>(day - exposure_day) + 0.5; }
};

namespace virology {

// Course landmarks (days).
inline constexpr double kMeanIncubation = 5.0;
inline constexpr double kIncubationLogSd = 0.2;
inline constexpr double kMinIncubation = 1.5;
inline constexpr double kMeanInfectiousnessOnset = 2.5;
inline constexpr double kInfectiousnessOnsetSd = 0.3;
inline constexpr double kMinInfectiousnessOnset = 0.5;
inline constexpr double kPeakBeforeSymptoms = 0.7;
inline constexpr double kMeanRecoveryAfterSymptoms = 14.0;
inline constexpr double kRecoveryAfterSymptomsSd = 2.0;
inline constexpr double kMinRecoveryAfterSymptoms = 1.0;
inline constexpr double kAsymptomaticProbability = 0.25;
inline constexpr double kMinPeakEvl = 0.5;
inline constexpr double kMaxPeakEvl = 1.0;
/// Minimum gap kept between infectiousness onset and the viral-load peak.
inline constexpr double kMinOnsetToPeak = 0.05;

/// Scaling applied to the population carefulness before it reduces transmission.
inline constexpr double kCarefulnessEffect = 0.5;

}  // namespace virology

/// Draws a fresh course for an agent exposed on `exposure_day`.
DiseaseCourse sample_disease_course(Day exposure_day, Rng& rng);

/// Piecewise-linear tent: 0 up to onset, linear rise to `peak_evl` at the
/// peak, linear fall to 0 at recovery, 0 afterwards.
double effective_viral_load(const DiseaseCourse& course, double t);

/// y_i^d: EVL at the midpoint of `day`, 0 for never-infected agents and for
/// days before exposure.
double ground_truth_infectiousness(const std::optional<DiseaseCourse>& course, Day day);

/// Epidemiological state implied by the course on `day`.
EpiState epi_state_on(const DiseaseCourse& course, Day day);

/// True when the agent expresses symptoms on `day` (symptomatic, past
/// incubation and still infectious).
bool has_true_symptoms(const DiseaseCourse& course, Day day);

/// First day on which `has_true_symptoms` holds; empty for asymptomatic courses.
std::optional<Day> first_symptomatic_day(const DiseaseCourse& course);

/// Transmission probability for one encounter before the Bernoulli draw.
double transmission_probability(double infector_evl, double base_rate, double mobility_env,
                                double carefulness);

bool transmission_trial(double infector_evl, double base_rate, double mobility_env,
                        double carefulness, Rng& rng);

/// Symptom-reporting noise applied by the app.
struct SymptomNoise {
    double dropout = 0.0;  // per true symptom, per day
    double dropin = 0.0;   // per day, one spurious symptom
};

/// Symptoms the app user reports on `day`, after dropout and drop-in.
SymptomSet report_symptoms(const std::optional<DiseaseCourse>& course, Day day,
                           const SymptomNoise& noise, Rng& rng);

/// Lifecycle of a single diagnostic test. Orders happen at most once per
/// agent, on the first symptomatic day.
struct TestRecord {
    std::optional<Day> order_day;
    Day result_day = 0;
    bool positive = false;

    /// Result as known on `day`.
    TestResult known_on(Day day) const;
};

struct TestingParams {
    double order_probability = 0.0;  // carefulness
    Day delay_days = 0;
    double false_negative_rate = 0.0;
};

/// Orders a test on the first symptomatic day with probability
/// `order_probability`. Returns true when an order was placed today.
bool maybe_order_test(const std::optional<DiseaseCourse>& course, Day day,
                      const TestingParams& params, TestRecord& record, Rng& rng);

/// Health status seen by an app user on `day`: reported symptoms plus the
/// test result known on that day.
HealthStatus update_health_status(const std::optional<DiseaseCourse>& course, const TestRecord& test,
                                  Day day, const SymptomNoise& noise, Rng& rng);

}  // namespace pct
