#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgame/calendar.hpp"

namespace sgame {

enum class DayType { weekday = 0, weekend = 1 };

inline const char* daytype_name(DayType t) { return t == DayType::weekday ? "weekday" : "weekend"; }

// Optional columns a table may carry; anything absent in the source stays
// absent rather than being zero-filled.
struct SchemaFlags {
    bool indoor_temperature = false;
    bool indoor_humidity = false;
    bool indoor_illuminance = false;
    bool ext_temperature = false;
    bool ext_humidity = false;
    bool ext_solar = false;
    bool rank = false;

    friend bool operator==(const SchemaFlags&, const SchemaFlags&) = default;
};

// One minute of telemetry for one occupant. Device states and usages are
// aligned with MinuteTable::resources.
struct MinuteRecord {
    std::string occupant_id;
    Minute timestamp = 0;
    std::vector<std::uint8_t> states;  // 0/1 per resource
    std::vector<double> usage;         // accumulated minutes today per resource
    double indoor_temperature = 0, indoor_humidity = 0, indoor_illuminance = 0;
    double ext_temperature = 0, ext_humidity = 0, ext_solar = 0;
    double points_total = 0;
    double survey_points = 0;
    int rank = 0;
    int portal_visits_today = 0;
};

struct MinuteTable {
    std::vector<std::string> resources;
    SchemaFlags present;
    std::vector<MinuteRecord> rows;  // sorted by (occupant_id, timestamp)

    int resource_index(const std::string& name) const;  // -1 when missing
    std::size_t n_rows() const { return rows.size(); }

    // [first, last) row ranges per occupant, in sorted order.
    std::vector<std::pair<std::size_t, std::size_t>> occupant_spans() const;

    // Throws on invariant violations (ordering, duplicate keys, state values,
    // usage accumulator monotonicity).
    void validate() const;
};

// Per-resource baselines indexed by daytype, boosters, and the pre-game range.
struct GameConfig {
    std::map<std::string, std::array<double, 2>> baselines;  // [weekday, weekend] minutes/day
    std::map<std::string, double> boosters;                  // s_i
    DateRange pre_game_range;
    std::vector<CivilDate> holidays;  // dates promoted to the weekend daytype

    double baseline_for(const std::string& resource, DayType t) const;
    double booster_for(const std::string& resource) const;
};

// --- ingestion ---------------------------------------------------------------

// Maps logical column names to the headers used by a particular file.
// Logical names: occupant_id, timestamp, status:<resource>, usage:<resource>,
// indoor_temperature, indoor_humidity, indoor_illuminance, ext_temperature,
// ext_humidity, ext_solar, points_total, survey_points, rank,
// portal_visits_today. With an empty mapping the header itself is taken as
// logical (canonical files round-trip with no configuration).
struct IngestSchema {
    char delimiter = ',';
    std::map<std::string, std::string> columns;
    int utc_offset_minutes = 0;  // added to parsed timestamps
};

MinuteTable ingest_minutes(std::istream& source, const IngestSchema& schema);
void write_minutes(std::ostream& out, const MinuteTable& table, char delimiter = ',');

// --- device-state detection -----------------------------------------------------

struct RawSensorSample {
    double acceleration = 0;  // magnitude
    double humidity = 0;
    double temperature = 0;
    double illuminance = 0;
};

struct DetectionThresholds {
    double accel_std = 0.1;          // fan ON above this std-dev
    double ac_humidity_max = 60.0;   // A/C ON when humidity AND temperature sit below
    double ac_temperature_max = 26.0;
    double illuminance_min = 150.0;  // lights ON above this
    std::size_t min_window = 10;
};

struct DetectedStates {
    bool fan_on = false;
    bool ac_on = false;
    bool lights_on = false;
};

DetectedStates detect_device_state(std::span<const RawSensorSample> window,
                                   const DetectionThresholds& thresholds);

// --- baselines / points / splitting ----------------------------------------------

// Arithmetic mean of per-day usage totals over matching-daytype days in the
// range, separately per occupant and resource.
using BaselineTable = std::map<std::string, std::map<std::string, std::array<double, 2>>>;
BaselineTable compute_baselines(const MinuteTable& table, const DateRange& pre_game_range,
                                const std::vector<CivilDate>& holidays = {});

// Cohort-level mean of the per-occupant baselines (the form GameConfig wants).
std::map<std::string, std::array<double, 2>> mean_baselines(const BaselineTable& per_occupant);

double compute_points(double baseline, double usage, double booster);

std::pair<MinuteTable, MinuteTable> split_periods(const MinuteTable& table, const DateRange& train,
                                                  const DateRange& test);

// Keeps rows whose date lies in the range.
MinuteTable filter_range(const MinuteTable& table, const DateRange& range);

// Daily usage totals: occupant -> resource -> (date, total minutes).
std::map<std::string, std::map<std::string, std::vector<std::pair<CivilDate, double>>>>
daily_usage_totals(const MinuteTable& table);

}  // namespace sgame
