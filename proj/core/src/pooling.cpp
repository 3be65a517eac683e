#include "sgame/pooling.hpp"

#include <algorithm>

#include "sgame/errors.hpp"

namespace sgame {

PoolingMode pooling_mode_from_name(const std::string& name) {
    if (name == "step_ahead") return PoolingMode::step_ahead;
    if (name == "sensor_free") return PoolingMode::sensor_free;
    throw ConfigError("unknown pooling mode '" + name + "'");
}

const char* pooling_mode_name(PoolingMode mode) {
    return mode == PoolingMode::step_ahead ? "step_ahead" : "sensor_free";
}

namespace {

bool in_any(const std::vector<DateRange>& ranges, const CivilDate& d) {
    for (const auto& r : ranges) {
        if (r.contains(d)) return true;
    }
    return false;
}

}  // namespace

FeatureMatrix pool_features(const MinuteTable& table, const PoolingConfig& config,
                            PoolingMode mode) {
    if (table.rows.empty()) throw EmptyTable();
    const int target = table.resource_index(config.target_resource);
    if (target < 0) throw UnknownColumn(config.target_resource);
    for (int lag : config.lags) {
        if (lag < 1) throw ConfigError("lag orders must be >= 1");
    }
    for (const auto& [res, _] : config.baselines) {
        if (table.resource_index(res) < 0) throw UnknownColumn(res);
    }

    // column layout
    std::vector<ColumnInfo> cols;
    const char* day_dummies[] = {"weekday", "weekend", "morning", "afternoon",
                                 "evening", "break",   "midterm", "final"};
    for (const char* name : day_dummies) cols.push_back({name, ColumnTag::dummy});

    std::vector<int> lags = config.lags;
    std::sort(lags.begin(), lags.end());
    for (std::size_t j = 0; j < table.resources.size(); ++j) {
        for (int lag : lags) {
            cols.push_back({"lag" + std::to_string(lag) + ":" + table.resources[j],
                            ColumnTag::resource});
        }
    }
    std::vector<std::pair<int, std::array<double, 2>>> frac_resources;
    for (const auto& [res, baseline] : config.baselines) {
        frac_resources.emplace_back(table.resource_index(res), baseline);
        cols.push_back({"usage_frac:" + res, ColumnTag::resource});
    }
    if (table.present.ext_temperature) cols.push_back({"ext_temperature", ColumnTag::external});
    if (table.present.ext_humidity) cols.push_back({"ext_humidity", ColumnTag::external});
    if (table.present.ext_solar) cols.push_back({"ext_solar", ColumnTag::external});
    if (table.present.indoor_temperature) cols.push_back({"indoor_temperature", ColumnTag::iot});
    if (table.present.indoor_humidity) cols.push_back({"indoor_humidity", ColumnTag::iot});
    if (table.present.indoor_illuminance) cols.push_back({"indoor_illuminance", ColumnTag::iot});
    cols.push_back({"points_total", ColumnTag::engagement});
    cols.push_back({"survey_points", ColumnTag::engagement});
    if (table.present.rank) cols.push_back({"rank", ColumnTag::engagement});
    cols.push_back({"portal_visits_today", ColumnTag::engagement});

    const int max_lag = lags.empty() ? 0 : lags.back();

    // usable rows: the full lag window must be contiguous minutes of the same
    // occupant
    std::vector<std::size_t> usable;
    const auto spans = table.occupant_spans();
    for (const auto& [first, last] : spans) {
        for (std::size_t i = first; i < last; ++i) {
            if (i - first < static_cast<std::size_t>(max_lag)) continue;
            bool contiguous = true;
            for (int l = 1; l <= max_lag; ++l) {
                if (table.rows[i - static_cast<std::size_t>(l)].timestamp !=
                    table.rows[i].timestamp - l) {
                    contiguous = false;
                    break;
                }
            }
            if (contiguous) usable.push_back(i);
        }
    }
    if (usable.empty()) throw EmptyTable();

    FeatureMatrix out;
    out.columns = cols;
    out.values.resize(static_cast<Eigen::Index>(usable.size()),
                      static_cast<Eigen::Index>(cols.size()));
    out.target.resize(usable.size());

    for (std::size_t r = 0; r < usable.size(); ++r) {
        const std::size_t i = usable[r];
        const MinuteRecord& row = table.rows[i];
        const CivilDate date = date_of(row.timestamp);
        const bool weekend = is_weekend_daytype(date, config.holidays);
        const int mod = minute_of_day(row.timestamp);
        // previous minute's record when it belongs to the same occupant/day
        const MinuteRecord* prev = nullptr;
        if (i > 0 && table.rows[i - 1].occupant_id == row.occupant_id &&
            table.rows[i - 1].timestamp == row.timestamp - 1 &&
            day_index(table.rows[i - 1].timestamp) == day_index(row.timestamp)) {
            prev = &table.rows[i - 1];
        }

        Eigen::Index c = 0;
        out.values(static_cast<Eigen::Index>(r), c++) = weekend ? 0.0 : 1.0;
        out.values(static_cast<Eigen::Index>(r), c++) = weekend ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = (mod >= 360 && mod < 720) ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = (mod >= 720 && mod < 1080) ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = (mod >= 1080) ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = in_any(config.break_ranges, date) ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = in_any(config.midterm_ranges, date) ? 1.0 : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = in_any(config.final_ranges, date) ? 1.0 : 0.0;

        for (std::size_t j = 0; j < table.resources.size(); ++j) {
            for (int lag : lags) {
                out.values(static_cast<Eigen::Index>(r), c++) =
                    static_cast<double>(table.rows[i - static_cast<std::size_t>(lag)].states[j]);
            }
        }
        for (const auto& [res_idx, baseline] : frac_resources) {
            // pre-decision usage: the accumulator as of the previous minute
            const double used = prev ? prev->usage[static_cast<std::size_t>(res_idx)] : 0.0;
            const double b = baseline[weekend ? 1 : 0];
            if (b <= 0.0) throw InvalidBaseline(b);
            out.values(static_cast<Eigen::Index>(r), c++) = used / b;
        }
        if (table.present.ext_temperature)
            out.values(static_cast<Eigen::Index>(r), c++) = row.ext_temperature;
        if (table.present.ext_humidity)
            out.values(static_cast<Eigen::Index>(r), c++) = row.ext_humidity;
        if (table.present.ext_solar)
            out.values(static_cast<Eigen::Index>(r), c++) = row.ext_solar;
        if (table.present.indoor_temperature)
            out.values(static_cast<Eigen::Index>(r), c++) = row.indoor_temperature;
        if (table.present.indoor_humidity)
            out.values(static_cast<Eigen::Index>(r), c++) = row.indoor_humidity;
        if (table.present.indoor_illuminance)
            out.values(static_cast<Eigen::Index>(r), c++) = row.indoor_illuminance;
        // engagement as of the previous minute (0 at a day boundary)
        out.values(static_cast<Eigen::Index>(r), c++) = prev ? prev->points_total : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) = prev ? prev->survey_points : 0.0;
        if (table.present.rank)
            out.values(static_cast<Eigen::Index>(r), c++) = prev ? static_cast<double>(prev->rank) : 0.0;
        out.values(static_cast<Eigen::Index>(r), c++) =
            prev ? static_cast<double>(prev->portal_visits_today) : 0.0;

        out.target[r] = table.rows[i].states[static_cast<std::size_t>(target)];
    }

    if (mode == PoolingMode::sensor_free) {
        // "sensor-free" drops the IoT feed entirely: indoor sensor channels
        // and every device-state-derived column
        return out.drop_tags({ColumnTag::iot, ColumnTag::resource});
    }
    return out;
}

}  // namespace sgame
