#include "sgame/minute_table.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "sgame/csv.hpp"
#include "sgame/errors.hpp"

namespace sgame {

int MinuteTable::resource_index(const std::string& name) const {
    for (std::size_t i = 0; i < resources.size(); ++i) {
        if (resources[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::pair<std::size_t, std::size_t>> MinuteTable::occupant_spans() const {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        if (i == rows.size() || rows[i].occupant_id != rows[start].occupant_id) {
            spans.emplace_back(start, i);
            start = i;
        }
    }
    return spans;
}

void MinuteTable::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MinuteRecord& r = rows[i];
        if (r.states.size() != resources.size() || r.usage.size() != resources.size()) {
            throw SchemaError("row arity does not match resource list");
        }
        for (std::size_t j = 0; j < resources.size(); ++j) {
            if (r.states[j] > 1) throw SchemaError("device state outside {0,1}");
            const double elapsed = static_cast<double>(minute_of_day(r.timestamp)) + 1.0;
            if (r.usage[j] < 0.0 || r.usage[j] > elapsed) {
                throw SchemaError("usage accumulator outside [0, minutes elapsed] for resource " +
                                  resources[j]);
            }
        }
        if (i > 0 && rows[i - 1].occupant_id == r.occupant_id) {
            if (rows[i - 1].timestamp >= r.timestamp) {
                throw DuplicateKeyError(r.occupant_id, format_timestamp(r.timestamp));
            }
            if (day_index(rows[i - 1].timestamp) == day_index(r.timestamp)) {
                for (std::size_t j = 0; j < resources.size(); ++j) {
                    if (r.usage[j] + 1e-9 < rows[i - 1].usage[j]) {
                        throw SchemaError("usage accumulator decreased within a day");
                    }
                }
            }
        }
    }
}

double GameConfig::baseline_for(const std::string& resource, DayType t) const {
    auto it = baselines.find(resource);
    if (it == baselines.end()) throw InvalidBaseline(0.0);
    return it->second[static_cast<int>(t)];
}

double GameConfig::booster_for(const std::string& resource) const {
    auto it = boosters.find(resource);
    return it == boosters.end() ? 1.0 : it->second;
}

// ---------------------------------------------------------------------------
// ingestion

namespace {

constexpr const char* kStatusPrefix = "status:";
constexpr const char* kUsagePrefix = "usage:";

struct ColumnPlan {
    int occupant = -1;
    int timestamp = -1;
    std::vector<std::pair<std::string, int>> status;  // resource -> column
    std::vector<std::pair<std::string, int>> usage;
    int indoor_temperature = -1, indoor_humidity = -1, indoor_illuminance = -1;
    int ext_temperature = -1, ext_humidity = -1, ext_solar = -1;
    int points_total = -1, survey_points = -1, rank = -1, portal_visits = -1;
};

int find_header(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

ColumnPlan plan_columns(const std::vector<std::string>& header, const IngestSchema& schema) {
    // logical name -> physical header; identity when no mapping is supplied
    auto physical = [&](const std::string& logical) -> std::string {
        auto it = schema.columns.find(logical);
        return it == schema.columns.end() ? logical : it->second;
    };
    auto lookup = [&](const std::string& logical, bool required) {
        const bool mapped = schema.columns.count(logical) > 0;
        int idx = find_header(header, physical(logical));
        if (idx < 0 && (required || mapped)) {
            throw SchemaError("mapped column '" + physical(logical) + "' (" + logical +
                              ") missing from header");
        }
        return idx;
    };

    ColumnPlan plan;
    plan.occupant = lookup("occupant_id", true);
    plan.timestamp = lookup("timestamp", true);

    // resources: take every mapped "status:*" entry, else scan the header
    std::set<std::string> resources;
    for (const auto& [logical, _] : schema.columns) {
        if (logical.rfind(kStatusPrefix, 0) == 0) resources.insert(logical.substr(7));
    }
    if (resources.empty()) {
        for (const auto& h : header) {
            if (h.rfind(kStatusPrefix, 0) == 0) resources.insert(h.substr(7));
        }
    }
    if (resources.empty()) throw SchemaError("no status:<resource> columns found");
    for (const auto& r : resources) {
        plan.status.emplace_back(r, lookup(kStatusPrefix + r, true));
        int uidx = lookup(kUsagePrefix + r, false);
        if (uidx >= 0) plan.usage.emplace_back(r, uidx);
    }

    plan.indoor_temperature = lookup("indoor_temperature", false);
    plan.indoor_humidity = lookup("indoor_humidity", false);
    plan.indoor_illuminance = lookup("indoor_illuminance", false);
    plan.ext_temperature = lookup("ext_temperature", false);
    plan.ext_humidity = lookup("ext_humidity", false);
    plan.ext_solar = lookup("ext_solar", false);
    plan.points_total = lookup("points_total", false);
    plan.survey_points = lookup("survey_points", false);
    plan.rank = lookup("rank", false);
    plan.portal_visits = lookup("portal_visits_today", false);
    return plan;
}

double parse_cell_double(const std::vector<std::string>& fields, int idx, std::size_t line,
                         const std::string& column) {
    try {
        return parse_double(fields.at(static_cast<std::size_t>(idx)));
    } catch (const std::exception& e) {
        throw RowParseError(line, column, e.what());
    }
}

}  // namespace

MinuteTable ingest_minutes(std::istream& source, const IngestSchema& schema) {
    std::string line;
    if (!read_csv_line(source, line)) throw SchemaError("missing header row");
    const std::vector<std::string> header = split_delimited(line, schema.delimiter);
    const ColumnPlan plan = plan_columns(header, schema);

    MinuteTable table;
    for (const auto& [r, _] : plan.status) table.resources.push_back(r);
    table.present.indoor_temperature = plan.indoor_temperature >= 0;
    table.present.indoor_humidity = plan.indoor_humidity >= 0;
    table.present.indoor_illuminance = plan.indoor_illuminance >= 0;
    table.present.ext_temperature = plan.ext_temperature >= 0;
    table.present.ext_humidity = plan.ext_humidity >= 0;
    table.present.ext_solar = plan.ext_solar >= 0;
    table.present.rank = plan.rank >= 0;

    std::size_t line_no = 1;
    while (read_csv_line(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_delimited(line, schema.delimiter);
        if (fields.size() != header.size()) {
            throw RowParseError(line_no, "", "expected " + std::to_string(header.size()) +
                                                 " fields, got " + std::to_string(fields.size()));
        }
        MinuteRecord rec;
        rec.occupant_id = fields[static_cast<std::size_t>(plan.occupant)];
        try {
            rec.timestamp =
                parse_timestamp(fields[static_cast<std::size_t>(plan.timestamp)]) +
                schema.utc_offset_minutes;
        } catch (const std::exception& e) {
            throw RowParseError(line_no, "timestamp", e.what());
        }
        rec.states.resize(table.resources.size(), 0);
        rec.usage.resize(table.resources.size(), 0.0);
        for (std::size_t j = 0; j < plan.status.size(); ++j) {
            const double v = parse_cell_double(fields, plan.status[j].second, line_no,
                                               kStatusPrefix + plan.status[j].first);
            if (v != 0.0 && v != 1.0) {
                throw RowParseError(line_no, kStatusPrefix + plan.status[j].first,
                                    "device state must be 0 or 1");
            }
            rec.states[j] = static_cast<std::uint8_t>(v);
        }
        for (const auto& [r, idx] : plan.usage) {
            rec.usage[static_cast<std::size_t>(table.resource_index(r))] =
                parse_cell_double(fields, idx, line_no, kUsagePrefix + r);
        }
        if (plan.indoor_temperature >= 0)
            rec.indoor_temperature = parse_cell_double(fields, plan.indoor_temperature, line_no, "indoor_temperature");
        if (plan.indoor_humidity >= 0)
            rec.indoor_humidity = parse_cell_double(fields, plan.indoor_humidity, line_no, "indoor_humidity");
        if (plan.indoor_illuminance >= 0)
            rec.indoor_illuminance = parse_cell_double(fields, plan.indoor_illuminance, line_no, "indoor_illuminance");
        if (plan.ext_temperature >= 0)
            rec.ext_temperature = parse_cell_double(fields, plan.ext_temperature, line_no, "ext_temperature");
        if (plan.ext_humidity >= 0)
            rec.ext_humidity = parse_cell_double(fields, plan.ext_humidity, line_no, "ext_humidity");
        if (plan.ext_solar >= 0)
            rec.ext_solar = parse_cell_double(fields, plan.ext_solar, line_no, "ext_solar");
        if (plan.points_total >= 0)
            rec.points_total = parse_cell_double(fields, plan.points_total, line_no, "points_total");
        if (plan.survey_points >= 0)
            rec.survey_points = parse_cell_double(fields, plan.survey_points, line_no, "survey_points");
        if (plan.rank >= 0)
            rec.rank = static_cast<int>(parse_cell_double(fields, plan.rank, line_no, "rank"));
        if (plan.portal_visits >= 0)
            rec.portal_visits_today =
                static_cast<int>(parse_cell_double(fields, plan.portal_visits, line_no, "portal_visits_today"));
        table.rows.push_back(std::move(rec));
    }

    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const MinuteRecord& a, const MinuteRecord& b) {
                         if (a.occupant_id != b.occupant_id) return a.occupant_id < b.occupant_id;
                         return a.timestamp < b.timestamp;
                     });
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (table.rows[i - 1].occupant_id == table.rows[i].occupant_id &&
            table.rows[i - 1].timestamp == table.rows[i].timestamp) {
            throw DuplicateKeyError(table.rows[i].occupant_id,
                                    format_timestamp(table.rows[i].timestamp));
        }
    }
    return table;
}

void write_minutes(std::ostream& out, const MinuteTable& table, char delimiter) {
    std::vector<std::string> header{"occupant_id", "timestamp"};
    for (const auto& r : table.resources) header.push_back(kStatusPrefix + r);
    for (const auto& r : table.resources) header.push_back(kUsagePrefix + r);
    if (table.present.indoor_temperature) header.push_back("indoor_temperature");
    if (table.present.indoor_humidity) header.push_back("indoor_humidity");
    if (table.present.indoor_illuminance) header.push_back("indoor_illuminance");
    if (table.present.ext_temperature) header.push_back("ext_temperature");
    if (table.present.ext_humidity) header.push_back("ext_humidity");
    if (table.present.ext_solar) header.push_back("ext_solar");
    header.push_back("points_total");
    header.push_back("survey_points");
    if (table.present.rank) header.push_back("rank");
    header.push_back("portal_visits_today");
    out << join(header, delimiter) << '\n';

    std::vector<std::string> fields;
    for (const MinuteRecord& r : table.rows) {
        fields.clear();
        fields.push_back(r.occupant_id);
        fields.push_back(format_timestamp(r.timestamp));
        for (std::size_t j = 0; j < table.resources.size(); ++j)
            fields.push_back(r.states[j] ? "1" : "0");
        for (std::size_t j = 0; j < table.resources.size(); ++j)
            fields.push_back(format_double(r.usage[j]));
        if (table.present.indoor_temperature) fields.push_back(format_double(r.indoor_temperature));
        if (table.present.indoor_humidity) fields.push_back(format_double(r.indoor_humidity));
        if (table.present.indoor_illuminance) fields.push_back(format_double(r.indoor_illuminance));
        if (table.present.ext_temperature) fields.push_back(format_double(r.ext_temperature));
        if (table.present.ext_humidity) fields.push_back(format_double(r.ext_humidity));
        if (table.present.ext_solar) fields.push_back(format_double(r.ext_solar));
        fields.push_back(format_double(r.points_total));
        fields.push_back(format_double(r.survey_points));
        if (table.present.rank) fields.push_back(std::to_string(r.rank));
        fields.push_back(std::to_string(r.portal_visits_today));
        out << join(fields, delimiter) << '\n';
    }
}

// ---------------------------------------------------------------------------
// device-state detection

DetectedStates detect_device_state(std::span<const RawSensorSample> window,
                                   const DetectionThresholds& thresholds) {
    if (window.size() < thresholds.min_window) {
        throw WindowTooShort(window.size(), thresholds.min_window);
    }
    const double n = static_cast<double>(window.size());
    double accel_mean = 0, hum_mean = 0, temp_mean = 0, lux_mean = 0;
    for (const auto& s : window) {
        accel_mean += s.acceleration;
        hum_mean += s.humidity;
        temp_mean += s.temperature;
        lux_mean += s.illuminance;
    }
    accel_mean /= n;
    hum_mean /= n;
    temp_mean /= n;
    lux_mean /= n;
    double accel_var = 0;
    for (const auto& s : window) {
        const double d = s.acceleration - accel_mean;
        accel_var += d * d;
    }
    accel_var /= n;

    DetectedStates out;
    out.fan_on = std::sqrt(accel_var) > thresholds.accel_std;
    out.ac_on = hum_mean < thresholds.ac_humidity_max && temp_mean < thresholds.ac_temperature_max;
    out.lights_on = lux_mean > thresholds.illuminance_min;
    return out;
}

// ---------------------------------------------------------------------------
// baselines / points / splitting

std::map<std::string, std::map<std::string, std::vector<std::pair<CivilDate, double>>>>
daily_usage_totals(const MinuteTable& table) {
    std::map<std::string, std::map<std::string, std::vector<std::pair<CivilDate, double>>>> totals;
    for (const auto& [first, last] : table.occupant_spans()) {
        const std::string& occ = table.rows[first].occupant_id;
        for (std::size_t j = 0; j < table.resources.size(); ++j) {
            auto& series = totals[occ][table.resources[j]];
            std::int64_t current_day = day_index(table.rows[first].timestamp);
            double day_max = 0.0;
            for (std::size_t i = first; i < last; ++i) {
                const std::int64_t d = day_index(table.rows[i].timestamp);
                if (d != current_day) {
                    series.emplace_back(civil_from_days(current_day), day_max);
                    current_day = d;
                    day_max = 0.0;
                }
                day_max = std::max(day_max, table.rows[i].usage[j]);
            }
            series.emplace_back(civil_from_days(current_day), day_max);
        }
    }
    return totals;
}

BaselineTable compute_baselines(const MinuteTable& table, const DateRange& pre_game_range,
                                const std::vector<CivilDate>& holidays) {
    if (pre_game_range.empty()) throw Error("pre-game range is empty");
    BaselineTable out;
    const auto totals = daily_usage_totals(table);
    for (const auto& [occ, by_resource] : totals) {
        for (const auto& [res, series] : by_resource) {
            double sum[2] = {0, 0};
            std::size_t count[2] = {0, 0};
            for (const auto& [date, total] : series) {
                if (!pre_game_range.contains(date)) continue;
                const int t = is_weekend_daytype(date, holidays) ? 1 : 0;
                sum[t] += total;
                ++count[t];
            }
            for (int t = 0; t < 2; ++t) {
                if (count[t] == 0) {
                    throw MissingBaselineData(occ, res,
                                              daytype_name(static_cast<DayType>(t)));
                }
            }
            out[occ][res] = {sum[0] / static_cast<double>(count[0]),
                             sum[1] / static_cast<double>(count[1])};
        }
    }
    return out;
}

std::map<std::string, std::array<double, 2>> mean_baselines(const BaselineTable& per_occupant) {
    std::map<std::string, std::array<double, 2>> acc;
    std::map<std::string, std::size_t> counts;
    for (const auto& [_, by_resource] : per_occupant) {
        for (const auto& [res, b] : by_resource) {
            auto& a = acc[res];
            a[0] += b[0];
            a[1] += b[1];
            ++counts[res];
        }
    }
    for (auto& [res, a] : acc) {
        a[0] /= static_cast<double>(counts[res]);
        a[1] /= static_cast<double>(counts[res]);
    }
    return acc;
}

double compute_points(double baseline, double usage, double booster) {
    if (baseline <= 0.0) throw InvalidBaseline(baseline);
    return booster * (baseline - usage) / baseline;
}

MinuteTable filter_range(const MinuteTable& table, const DateRange& range) {
    MinuteTable out;
    out.resources = table.resources;
    out.present = table.present;
    for (const MinuteRecord& r : table.rows) {
        if (range.contains(date_of(r.timestamp))) out.rows.push_back(r);
    }
    return out;
}

std::pair<MinuteTable, MinuteTable> split_periods(const MinuteTable& table, const DateRange& train,
                                                  const DateRange& test) {
    if (train.overlaps(test)) throw OverlapError();
    return {filter_range(table, train), filter_range(table, test)};
}

}  // namespace sgame
