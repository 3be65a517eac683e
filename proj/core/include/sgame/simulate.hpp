#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "sgame/minute_table.hpp"
#include "sgame/rng.hpp"

namespace sgame {

// Daily sinusoid plus seeded Gaussian noise; peak_minute is the minute of day
// at which the cycle tops out.
struct SinusoidChannel {
    double mean = 0.0;
    double amplitude = 0.0;
    int peak_minute = 900;
    double noise_sd = 0.0;
};

// Weather generators and the academic calendar shared by a simulated cohort.
struct ExogenousModel {
    SinusoidChannel temperature{28.0, 3.0, 900, 0.5};
    SinusoidChannel humidity{70.0, 8.0, 240, 2.0};   // clamped to [0, 100]
    SinusoidChannel solar{350.0, 350.0, 780, 25.0};
    bool clamp_solar_nonnegative = true;
    CivilDate start_date{2017, 9, 12};
    std::vector<DateRange> break_ranges;
    std::vector<DateRange> midterm_ranges;
    std::vector<DateRange> final_ranges;
    std::vector<CivilDate> holidays;
    std::uint64_t seed = 0;
};

struct ExoSeries {
    Minute start = 0;
    std::vector<double> temperature;
    std::vector<double> humidity;
    std::vector<double> solar;
};

ExoSeries generate_exogenous(const ExogenousModel& model, long long horizon_minutes);

// Linear random utility for one resource: u_on = beta . x, u_off = 0, plus
// independent Gumbel noise with the given scale on each alternative. Feature
// names understood by the evaluator: intercept, lag<k>, ext_temperature,
// ext_humidity, ext_solar, weekday, weekend, morning, afternoon, evening,
// break, midterm, final, usage_frac.
struct ResourceUtility {
    std::vector<std::string> features;
    Eigen::VectorXd beta;
    double gumbel_scale = 1.0;

    int lag_order() const;  // highest lag<k> referenced
    void validate() const;
};

struct OccupantProfile {
    std::string occupant_id;
    std::vector<std::pair<std::string, ResourceUtility>> utilities;  // resource -> utility
    double portal_visit_rate = 0.0;  // per-minute probability of a portal visit
};

// One draw from the additive-Gumbel choice model: argmax over alternatives of
// utility + scale * Gumbel. Choice frequencies follow the multinomial-logit
// closed form exp(u_k / scale) / sum_j exp(u_j / scale).
std::size_t sample_gumbel_choice(std::span<const double> utilities, Rng& rng, double scale = 1.0);

// Closed-form choice probabilities for the same model (test oracle and Bayes
// scorer).
std::vector<double> logit_choice_probabilities(std::span<const double> utilities, double scale = 1.0);

// Simulates one occupant minute-by-minute. Each resource's state is an
// independent per-resource logit draw: with additive independent noise per
// resource, the joint maximization of summed random utilities decomposes
// exactly into per-resource argmaxes, so this reproduces the sequential
// co-optimization game. Usage accumulators reset at day boundaries; points
// are settled into points_total at the final minute of each day.
MinuteTable simulate_occupant(const OccupantProfile& profile, const ExogenousModel& exo,
                              long long horizon_minutes, const GameConfig& game, Rng& rng);

// Union of per-occupant simulations sharing one exogenous draw per timestamp;
// a daily rank column is filled from cumulative points at each day end.
MinuteTable simulate_cohort(const std::vector<OccupantProfile>& profiles,
                            const ExogenousModel& exo, long long horizon_minutes,
                            const GameConfig& game, Rng& rng);

// AUC of the true logit probability as a scorer against the realized states
// in `table` — the in-expectation ceiling for any learner on this data.
// `resource` may be empty when the profile has exactly one utility.
// Break/midterm/final and usage_frac features need the optional context.
struct FeatureContext {
    const GameConfig* game = nullptr;
    const ExogenousModel* calendar = nullptr;
};
double bayes_optimal_auc(const OccupantProfile& profile, const MinuteTable& table,
                         const std::string& resource = "", const FeatureContext& context = {});

// --- config parsing (shared by CLI and tests) ---------------------------------

struct SimConfig {
    std::vector<OccupantProfile> profiles;
    ExogenousModel exogenous;
    GameConfig game;
    long long horizon_minutes = kMinutesPerDay;
    std::uint64_t seed = 0;
};

SimConfig parse_sim_config(const nlohmann::json& doc);

}  // namespace sgame
