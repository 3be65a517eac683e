#include "sgame/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "sgame/errors.hpp"
#include "sgame/metrics.hpp"

namespace sgame {

namespace {

double channel_value(const SinusoidChannel& ch, int minute_of_day_v, Rng& rng) {
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>(minute_of_day_v - ch.peak_minute) / 1440.0;
    return ch.mean + ch.amplitude * std::cos(phase) + ch.noise_sd * rng.normal();
}

bool in_any(const std::vector<DateRange>& ranges, const CivilDate& d) {
    for (const auto& r : ranges) {
        if (r.contains(d)) return true;
    }
    return false;
}

// Everything a single feature evaluation can depend on at one minute.
struct MinuteFeatureInputs {
    Minute timestamp = 0;
    double ext_temperature = 0, ext_humidity = 0, ext_solar = 0;
    std::span<const std::uint8_t> lag_states;  // index 0 = one minute back
    double usage_pre = 0;                      // minutes used today before this minute
    double baseline_today = 0;                 // 0 when unknown
    bool is_break = false, is_midterm = false, is_final = false;
    bool has_calendar = false, has_baseline = false;
};

double evaluate_feature(const std::string& name, const MinuteFeatureInputs& in) {
    if (name == "intercept") return 1.0;
    if (name == "ext_temperature") return in.ext_temperature;
    if (name == "ext_humidity") return in.ext_humidity;
    if (name == "ext_solar") return in.ext_solar;
    if (name.rfind("lag", 0) == 0) {
        const int k = std::stoi(name.substr(3));
        if (k < 1) throw UnknownColumn(name);
        const std::size_t idx = static_cast<std::size_t>(k) - 1;
        return idx < in.lag_states.size() ? static_cast<double>(in.lag_states[idx]) : 0.0;
    }
    const CivilDate date = date_of(in.timestamp);
    const int mod = minute_of_day(in.timestamp);
    if (name == "weekday") return is_saturday_or_sunday(date) ? 0.0 : 1.0;
    if (name == "weekend") return is_saturday_or_sunday(date) ? 1.0 : 0.0;
    if (name == "morning") return (mod >= 360 && mod < 720) ? 1.0 : 0.0;
    if (name == "afternoon") return (mod >= 720 && mod < 1080) ? 1.0 : 0.0;
    if (name == "evening") return mod >= 1080 ? 1.0 : 0.0;
    if (name == "break" || name == "midterm" || name == "final") {
        if (!in.has_calendar) throw UnknownColumn(name + " (no calendar context)");
        if (name == "break") return in.is_break ? 1.0 : 0.0;
        if (name == "midterm") return in.is_midterm ? 1.0 : 0.0;
        return in.is_final ? 1.0 : 0.0;
    }
    if (name == "usage_frac") {
        if (!in.has_baseline) throw UnknownColumn("usage_frac (no baseline context)");
        return in.usage_pre / in.baseline_today;
    }
    throw UnknownColumn(name);
}

double utility_value(const ResourceUtility& u, const MinuteFeatureInputs& in) {
    double v = 0.0;
    for (std::size_t z = 0; z < u.features.size(); ++z) {
        v += u.beta(static_cast<Eigen::Index>(z)) * evaluate_feature(u.features[z], in);
    }
    return v;
}

}  // namespace

int ResourceUtility::lag_order() const {
    int max_lag = 0;
    for (const auto& f : features) {
        if (f.rfind("lag", 0) == 0) max_lag = std::max(max_lag, std::stoi(f.substr(3)));
    }
    return max_lag;
}

void ResourceUtility::validate() const {
    if (static_cast<std::size_t>(beta.size()) != features.size()) {
        throw ConfigError("beta length does not match feature list length");
    }
    if (!(gumbel_scale > 0.0)) throw ConfigError("Gumbel scale must be positive");
}

ExoSeries generate_exogenous(const ExogenousModel& model, long long horizon_minutes) {
    ExoSeries s;
    s.start = start_of_date(model.start_date);
    s.temperature.reserve(static_cast<std::size_t>(horizon_minutes));
    s.humidity.reserve(static_cast<std::size_t>(horizon_minutes));
    s.solar.reserve(static_cast<std::size_t>(horizon_minutes));
    Rng rng(model.seed);
    for (long long t = 0; t < horizon_minutes; ++t) {
        const int mod = minute_of_day(s.start + t);
        s.temperature.push_back(channel_value(model.temperature, mod, rng));
        double h = channel_value(model.humidity, mod, rng);
        s.humidity.push_back(std::clamp(h, 0.0, 100.0));
        double sol = channel_value(model.solar, mod, rng);
        if (model.clamp_solar_nonnegative) sol = std::max(sol, 0.0);
        s.solar.push_back(sol);
    }
    return s;
}

std::size_t sample_gumbel_choice(std::span<const double> utilities, Rng& rng, double scale) {
    if (utilities.empty()) throw EmptyChoiceSet();
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < utilities.size(); ++k) {
        if (!std::isfinite(utilities[k])) throw Error("utilities must be finite");
        const double v = utilities[k] + scale * rng.gumbel();
        if (v > best_v) {
            best_v = v;
            best = k;
        }
    }
    return best;
}

std::vector<double> logit_choice_probabilities(std::span<const double> utilities, double scale) {
    if (utilities.empty()) throw EmptyChoiceSet();
    double max_u = -std::numeric_limits<double>::infinity();
    for (double u : utilities) max_u = std::max(max_u, u);
    std::vector<double> p(utilities.size());
    double z = 0.0;
    for (std::size_t k = 0; k < utilities.size(); ++k) {
        p[k] = std::exp((utilities[k] - max_u) / scale);
        z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
}

namespace {

struct OccupantState {
    std::vector<std::vector<std::uint8_t>> lag_buffers;  // per resource, index 0 = newest
    std::vector<double> usage_today;
    double points_total = 0;
    int portal_visits_today = 0;
    int rank = 0;
};

MinuteFeatureInputs make_inputs(Minute ts, const ExoSeries& exo, long long t,
                                const ExogenousModel& model, const GameConfig& game,
                                const std::string& resource, const OccupantState& st,
                                std::size_t resource_idx, bool weekend) {
    MinuteFeatureInputs in;
    in.timestamp = ts;
    in.ext_temperature = exo.temperature[static_cast<std::size_t>(t)];
    in.ext_humidity = exo.humidity[static_cast<std::size_t>(t)];
    in.ext_solar = exo.solar[static_cast<std::size_t>(t)];
    in.lag_states = st.lag_buffers[resource_idx];
    in.usage_pre = st.usage_today[resource_idx];
    in.has_calendar = true;
    const CivilDate date = date_of(ts);
    in.is_break = in_any(model.break_ranges, date);
    in.is_midterm = in_any(model.midterm_ranges, date);
    in.is_final = in_any(model.final_ranges, date);
    auto it = game.baselines.find(resource);
    if (it != game.baselines.end()) {
        in.baseline_today = it->second[weekend ? 1 : 0];
        in.has_baseline = in.baseline_today > 0.0;
    }
    return in;
}

// Core loop shared by the single-occupant and cohort entry points.
void simulate_into(MinuteTable& table, const OccupantProfile& profile, const ExogenousModel& model,
                   const ExoSeries& exo, long long horizon, const GameConfig& game, Rng& rng) {
    OccupantState st;
    st.lag_buffers.resize(profile.utilities.size());
    st.usage_today.assign(profile.utilities.size(), 0.0);
    for (std::size_t j = 0; j < profile.utilities.size(); ++j) {
        const auto& u = profile.utilities[j].second;
        u.validate();
        st.lag_buffers[j].assign(static_cast<std::size_t>(std::max(u.lag_order(), 1)), 0);
    }

    for (long long t = 0; t < horizon; ++t) {
        const Minute ts = exo.start + t;
        const int mod = minute_of_day(ts);
        const CivilDate date = date_of(ts);
        const bool weekend = is_weekend_daytype(date, game.holidays);
        if (mod == 0 && t > 0) {
            std::fill(st.usage_today.begin(), st.usage_today.end(), 0.0);
            st.portal_visits_today = 0;
        }

        MinuteRecord rec;
        rec.occupant_id = profile.occupant_id;
        rec.timestamp = ts;
        rec.states.resize(profile.utilities.size());
        rec.usage.resize(profile.utilities.size());

        for (std::size_t j = 0; j < profile.utilities.size(); ++j) {
            const auto& [resource, utility] = profile.utilities[j];
            const MinuteFeatureInputs in =
                make_inputs(ts, exo, t, model, game, resource, st, j, weekend);
            const double u_on = utility_value(utility, in);
            const double choice_utilities[2] = {0.0, u_on};
            const std::size_t choice =
                sample_gumbel_choice(choice_utilities, rng, utility.gumbel_scale);
            rec.states[j] = static_cast<std::uint8_t>(choice);
            st.usage_today[j] += static_cast<double>(choice);
            rec.usage[j] = st.usage_today[j];
            // shift the lag buffer (newest first)
            auto& buf = st.lag_buffers[j];
            for (std::size_t k = buf.size(); k-- > 1;) buf[k] = buf[k - 1];
            buf[0] = rec.states[j];
        }

        if (profile.portal_visit_rate > 0.0 && rng.bernoulli(profile.portal_visit_rate)) {
            ++st.portal_visits_today;
        }

        if (mod == kMinutesPerDay - 1) {
            // settle the day's points
            for (std::size_t j = 0; j < profile.utilities.size(); ++j) {
                const auto& resource = profile.utilities[j].first;
                const double b = game.baseline_for(resource, weekend ? DayType::weekend : DayType::weekday);
                st.points_total += compute_points(b, st.usage_today[j], game.booster_for(resource));
            }
        }
        rec.ext_temperature = exo.temperature[static_cast<std::size_t>(t)];
        rec.ext_humidity = exo.humidity[static_cast<std::size_t>(t)];
        rec.ext_solar = exo.solar[static_cast<std::size_t>(t)];
        rec.points_total = st.points_total;
        rec.survey_points = 0.0;
        rec.portal_visits_today = st.portal_visits_today;
        table.rows.push_back(std::move(rec));
    }
}

}  // namespace

MinuteTable simulate_occupant(const OccupantProfile& profile, const ExogenousModel& exo,
                              long long horizon_minutes, const GameConfig& game, Rng& rng) {
    if (horizon_minutes < kMinutesPerDay) throw InvalidHorizon(horizon_minutes);
    if (profile.utilities.empty()) throw EmptyChoiceSet();
    MinuteTable table;
    for (const auto& [resource, _] : profile.utilities) table.resources.push_back(resource);
    table.present.ext_temperature = true;
    table.present.ext_humidity = true;
    table.present.ext_solar = true;
    const ExoSeries series = generate_exogenous(exo, horizon_minutes);
    simulate_into(table, profile, exo, series, horizon_minutes, game, rng);
    return table;
}

MinuteTable simulate_cohort(const std::vector<OccupantProfile>& profiles,
                            const ExogenousModel& exo, long long horizon_minutes,
                            const GameConfig& game, Rng& rng) {
    if (horizon_minutes < kMinutesPerDay) throw InvalidHorizon(horizon_minutes);
    if (profiles.empty()) throw EmptyChoiceSet();
    std::set<std::string> ids;
    for (const auto& p : profiles) {
        if (!ids.insert(p.occupant_id).second) throw DuplicateOccupantId(p.occupant_id);
    }
    // every occupant must expose the same resource list for a coherent table
    MinuteTable table;
    for (const auto& [resource, _] : profiles[0].utilities) table.resources.push_back(resource);
    for (const auto& p : profiles) {
        if (p.utilities.size() != table.resources.size()) {
            throw ConfigError("cohort profiles must share one resource list");
        }
        for (std::size_t j = 0; j < p.utilities.size(); ++j) {
            if (p.utilities[j].first != table.resources[j]) {
                throw ConfigError("cohort profiles must share one resource list");
            }
        }
    }
    table.present.ext_temperature = true;
    table.present.ext_humidity = true;
    table.present.ext_solar = true;
    table.present.rank = true;

    const ExoSeries series = generate_exogenous(exo, horizon_minutes);
    std::vector<MinuteTable> per_occupant(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        per_occupant[i].resources = table.resources;
        Rng occupant_rng = rng.fork(i);
        simulate_into(per_occupant[i], profiles[i], exo, series, horizon_minutes, game,
                      occupant_rng);
    }

    // daily ranks: 1 = most points, ties by occupant order; minutes before the
    // first settled day carry the initial ordering
    const std::size_t n = profiles.size();
    std::vector<int> current_rank(n);
    for (std::size_t i = 0; i < n; ++i) current_rank[i] = static_cast<int>(i) + 1;
    for (long long t = 0; t < horizon_minutes; ++t) {
        if (minute_of_day(series.start + t) == kMinutesPerDay - 1) {
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return per_occupant[a].rows[static_cast<std::size_t>(t)].points_total >
                       per_occupant[b].rows[static_cast<std::size_t>(t)].points_total;
            });
            for (std::size_t pos = 0; pos < n; ++pos) {
                current_rank[order[pos]] = static_cast<int>(pos) + 1;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            per_occupant[i].rows[static_cast<std::size_t>(t)].rank = current_rank[i];
        }
    }

    for (auto& part : per_occupant) {
        for (auto& row : part.rows) table.rows.push_back(std::move(row));
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const MinuteRecord& a, const MinuteRecord& b) {
                         if (a.occupant_id != b.occupant_id) return a.occupant_id < b.occupant_id;
                         return a.timestamp < b.timestamp;
                     });
    return table;
}

double bayes_optimal_auc(const OccupantProfile& profile, const MinuteTable& table,
                         const std::string& resource, const FeatureContext& context) {
    std::string target = resource;
    if (target.empty()) {
        if (profile.utilities.size() != 1) {
            throw Error("profile has several resources; name the one to score");
        }
        target = profile.utilities[0].first;
    }
    const ResourceUtility* utility = nullptr;
    for (const auto& [res, u] : profile.utilities) {
        if (res == target) utility = &u;
    }
    if (utility == nullptr) throw UnknownColumn(target);
    const int res_idx = table.resource_index(target);
    if (res_idx < 0) throw UnknownColumn(target);

    const int lag = std::max(utility->lag_order(), 1);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& [first, last] : table.occupant_spans()) {
        if (!profile.occupant_id.empty() && table.rows[first].occupant_id != profile.occupant_id) {
            continue;
        }
        std::vector<std::uint8_t> buf(static_cast<std::size_t>(lag), 0);
        for (std::size_t i = first; i < last; ++i) {
            const MinuteRecord& row = table.rows[i];
            MinuteFeatureInputs in;
            in.timestamp = row.timestamp;
            in.ext_temperature = row.ext_temperature;
            in.ext_humidity = row.ext_humidity;
            in.ext_solar = row.ext_solar;
            in.lag_states = buf;
            const CivilDate date = date_of(row.timestamp);
            if (context.calendar != nullptr) {
                in.has_calendar = true;
                in.is_break = in_any(context.calendar->break_ranges, date);
                in.is_midterm = in_any(context.calendar->midterm_ranges, date);
                in.is_final = in_any(context.calendar->final_ranges, date);
            }
            if (context.game != nullptr) {
                auto it = context.game->baselines.find(target);
                if (it != context.game->baselines.end()) {
                    const bool weekend = is_weekend_daytype(date, context.game->holidays);
                    in.baseline_today = it->second[weekend ? 1 : 0];
                    in.has_baseline = in.baseline_today > 0.0;
                    // pre-decision usage reconstructed from the accumulator
                    in.usage_pre = row.usage[static_cast<std::size_t>(res_idx)] -
                                   static_cast<double>(row.states[static_cast<std::size_t>(res_idx)]);
                }
            }
            const double u_on = utility_value(*utility, in);
            scores.push_back(1.0 / (1.0 + std::exp(-u_on / utility->gumbel_scale)));
            labels.push_back(row.states[static_cast<std::size_t>(res_idx)]);
            for (std::size_t k = buf.size(); k-- > 1;) buf[k] = buf[k - 1];
            buf[0] = row.states[static_cast<std::size_t>(res_idx)];
        }
    }
    bool any_pos = false, any_neg = false;
    for (int y : labels) (y ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) throw DegenerateLabels();
    return roc_auc(scores, labels).auc;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

DateRange parse_range(const nlohmann::json& j) {
    return DateRange{parse_date(j.at(0).get<std::string>()), parse_date(j.at(1).get<std::string>())};
}

std::vector<DateRange> parse_ranges(const nlohmann::json& doc, const char* key) {
    std::vector<DateRange> out;
    if (doc.contains(key)) {
        for (const auto& j : doc.at(key)) out.push_back(parse_range(j));
    }
    return out;
}

SinusoidChannel parse_channel(const nlohmann::json& j, SinusoidChannel fallback) {
    SinusoidChannel ch = fallback;
    if (j.contains("mean")) ch.mean = j.at("mean").get<double>();
    if (j.contains("amplitude")) ch.amplitude = j.at("amplitude").get<double>();
    if (j.contains("peak_minute")) ch.peak_minute = j.at("peak_minute").get<int>();
    if (j.contains("noise_sd")) ch.noise_sd = j.at("noise_sd").get<double>();
    return ch;
}

}  // namespace

SimConfig parse_sim_config(const nlohmann::json& doc) {
    SimConfig cfg;
    cfg.horizon_minutes = doc.value("horizon_minutes", static_cast<long long>(kMinutesPerDay));
    cfg.seed = doc.value("seed", 0ULL);

    const nlohmann::json& exo = doc.value("exogenous", nlohmann::json::object());
    cfg.exogenous.temperature = parse_channel(exo.value("temperature", nlohmann::json::object()),
                                              cfg.exogenous.temperature);
    cfg.exogenous.humidity =
        parse_channel(exo.value("humidity", nlohmann::json::object()), cfg.exogenous.humidity);
    cfg.exogenous.solar =
        parse_channel(exo.value("solar", nlohmann::json::object()), cfg.exogenous.solar);
    if (exo.contains("clamp_solar_nonnegative")) {
        cfg.exogenous.clamp_solar_nonnegative = exo.at("clamp_solar_nonnegative").get<bool>();
    }
    if (exo.contains("start_date")) {
        cfg.exogenous.start_date = parse_date(exo.at("start_date").get<std::string>());
    }
    cfg.exogenous.break_ranges = parse_ranges(exo, "break_ranges");
    cfg.exogenous.midterm_ranges = parse_ranges(exo, "midterm_ranges");
    cfg.exogenous.final_ranges = parse_ranges(exo, "final_ranges");
    if (exo.contains("holidays")) {
        for (const auto& h : exo.at("holidays")) {
            cfg.exogenous.holidays.push_back(parse_date(h.get<std::string>()));
        }
    }
    cfg.exogenous.seed = exo.value("seed", cfg.seed);

    const nlohmann::json& game = doc.value("game", nlohmann::json::object());
    if (game.contains("baselines")) {
        for (auto it = game.at("baselines").begin(); it != game.at("baselines").end(); ++it) {
            cfg.game.baselines[it.key()] = {it.value().at(0).get<double>(),
                                            it.value().at(1).get<double>()};
        }
    }
    if (game.contains("boosters")) {
        for (auto it = game.at("boosters").begin(); it != game.at("boosters").end(); ++it) {
            cfg.game.boosters[it.key()] = it.value().get<double>();
        }
    }
    cfg.game.holidays = cfg.exogenous.holidays;

    for (const auto& p : doc.at("profiles")) {
        OccupantProfile profile;
        profile.occupant_id = p.at("occupant_id").get<std::string>();
        profile.portal_visit_rate = p.value("portal_visit_rate", 0.0);
        for (const auto& u : p.at("utilities")) {
            ResourceUtility ru;
            std::vector<double> beta;
            for (const auto& f : u.at("features")) ru.features.push_back(f.get<std::string>());
            for (const auto& b : u.at("beta")) beta.push_back(b.get<double>());
            ru.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
            ru.gumbel_scale = u.value("gumbel_scale", 1.0);
            ru.validate();
            profile.utilities.emplace_back(u.at("resource").get<std::string>(), std::move(ru));
        }
        cfg.profiles.push_back(std::move(profile));
    }
    return cfg;
}

}  // namespace sgame
