#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sgame/errors.hpp"
#include "sgame/rng.hpp"
#include "sgame/minute_table.hpp"

using namespace sgame;

namespace {

const char* kSmallCsv =
    "occupant_id,timestamp,status:desk_light,usage:desk_light,ext_temperature,points_total,"
    "survey_points,portal_visits_today\n"
    "occ1,2017-09-12T00:00,1,1,28.5,0,0,0\n"
    "occ1,2017-09-12T00:01,0,1,28.4,0,0,0\n"
    "occ1,2017-09-12T00:02,1,2,28.3,0,0,1\n";

MinuteTable small_table() {
    std::istringstream in(kSmallCsv);
    return ingest_minutes(in, {});
}

// days_from_civil(2017-09-12) in minutes
const Minute kT0 = days_from_civil({2017, 9, 12}) * kMinutesPerDay;

MinuteRecord make_row(const std::string& occ, Minute ts, int state, double usage) {
    MinuteRecord r;
    r.occupant_id = occ;
    r.timestamp = ts;
    r.states = {static_cast<std::uint8_t>(state)};
    r.usage = {usage};
    return r;
}

}  // namespace

TEST_CASE("ingest parses a well-formed file") {
    const MinuteTable t = small_table();
    CHECK(t.n_rows() == 3);
    CHECK(t.resources == std::vector<std::string>{"desk_light"});
    CHECK(t.present.ext_temperature);
    CHECK_FALSE(t.present.ext_humidity);
    CHECK(t.rows[0].timestamp == kT0);
    CHECK(t.rows[2].states[0] == 1);
    CHECK(t.rows[2].usage[0] == 2.0);
    CHECK(t.rows[2].portal_visits_today == 1);
    t.validate();
}

TEST_CASE("ingest rejects malformed timestamps with position info") {
    std::istringstream in(
        "occupant_id,timestamp,status:fan\n"
        "occ1,2017-09-12T00:00,1\n"
        "occ1,banana,0\n");
    try {
        ingest_minutes(in, {});
        FAIL("expected RowParseError");
    } catch (const RowParseError& e) {
        CHECK(e.line == 3);
        CHECK(e.column == "timestamp");
    }
}

TEST_CASE("ingest rejects duplicate keys and missing mapped columns") {
    std::istringstream dup(
        "occupant_id,timestamp,status:fan\n"
        "occ1,2017-09-12T00:00,1\n"
        "occ1,2017-09-12T00:00,0\n");
    CHECK_THROWS_AS(ingest_minutes(dup, {}), DuplicateKeyError);

    std::istringstream in("occupant_id,timestamp,status:fan\nocc1,2017-09-12T00:00,1\n");
    IngestSchema schema;
    schema.columns["ext_humidity"] = "hum";  // mapped but absent
    CHECK_THROWS_AS(ingest_minutes(in, schema), SchemaError);
}

TEST_CASE("ingest sorts rows and applies schema mapping") {
    std::istringstream in(
        "who,when,fan_state\n"
        "b,2017-09-12T00:01,1\n"
        "a,2017-09-12T00:00,0\n"
        "b,2017-09-12T00:00,1\n");
    IngestSchema schema;
    schema.columns["occupant_id"] = "who";
    schema.columns["timestamp"] = "when";
    schema.columns["status:fan"] = "fan_state";
    const MinuteTable t = ingest_minutes(in, schema);
    CHECK(t.rows[0].occupant_id == "a");
    CHECK(t.rows[1].occupant_id == "b");
    CHECK(t.rows[1].timestamp < t.rows[2].timestamp);
}

TEST_CASE("write/ingest round trip preserves the table") {
    const MinuteTable t = small_table();
    std::ostringstream out;
    write_minutes(out, t);
    std::istringstream in(out.str());
    const MinuteTable back = ingest_minutes(in, {});
    REQUIRE(back.n_rows() == t.n_rows());
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
        CHECK(back.rows[i].occupant_id == t.rows[i].occupant_id);
        CHECK(back.rows[i].timestamp == t.rows[i].timestamp);
        CHECK(back.rows[i].states == t.rows[i].states);
        CHECK(back.rows[i].usage == t.rows[i].usage);
        CHECK(back.rows[i].ext_temperature == t.rows[i].ext_temperature);
    }
}

TEST_CASE("device-state detection thresholds") {
    DetectionThresholds thr;
    thr.min_window = 2;
    std::vector<RawSensorSample> window;
    for (int i = 0; i < 10; ++i) {
        window.push_back({i % 2 ? 0.5 : -0.5, 80.0, 30.0, 50.0});  // accel sd = 0.5
    }
    thr.accel_std = 0.1;
    const DetectedStates s = detect_device_state(window, thr);
    CHECK(s.fan_on);          // std-dev 0.5 > 0.1
    CHECK_FALSE(s.ac_on);     // humidity 80 and temp 30 both above thresholds
    CHECK_FALSE(s.lights_on); // 50 lux below 150

    std::vector<RawSensorSample> cool;
    for (int i = 0; i < 10; ++i) cool.push_back({0.0, 50.0, 23.0, 400.0});
    const DetectedStates s2 = detect_device_state(cool, thr);
    CHECK_FALSE(s2.fan_on);
    CHECK(s2.ac_on);
    CHECK(s2.lights_on);
}

TEST_CASE("detection is order-free and rejects short windows") {
    DetectionThresholds thr;
    thr.min_window = 10;
    std::vector<RawSensorSample> window;
    for (int i = 0; i < 12; ++i) {
        window.push_back({0.1 * i, 55.0 + i, 24.0, 200.0 + 10 * i});
    }
    const DetectedStates fwd = detect_device_state(window, thr);
    std::reverse(window.begin(), window.end());
    const DetectedStates rev = detect_device_state(window, thr);
    CHECK(fwd.fan_on == rev.fan_on);
    CHECK(fwd.ac_on == rev.ac_on);
    CHECK(fwd.lights_on == rev.lights_on);

    std::vector<RawSensorSample> one{{0.0, 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(detect_device_state(one, thr), WindowTooShort);
}

TEST_CASE("compute_points reproduces the points formula") {
    CHECK(compute_points(100, 60, 10) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(compute_points(100, 100, 5) == 0.0);
    CHECK(compute_points(100, 150, 1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK_THROWS_AS(compute_points(0, 10, 1), InvalidBaseline);
    CHECK_THROWS_AS(compute_points(-5, 10, 1), InvalidBaseline);
}

TEST_CASE("points are linear in the booster and s at zero usage") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double b = rng.uniform(1.0, 500.0);
        const double s = rng.uniform(0.1, 20.0);
        const double u = rng.uniform(0.0, 2.0 * b);
        CHECK(compute_points(b, u, 2.0 * s) == doctest::Approx(2.0 * compute_points(b, u, s)));
        CHECK(compute_points(b, 0.0, s) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("baselines are daytype means of daily totals") {
    // Sep 12 2017 is Tuesday; Sep 16 Saturday
    MinuteTable t;
    t.resources = {"fan"};
    auto add_day = [&](const CivilDate& date, double total) {
        const Minute start = start_of_date(date);
        // two minutes are enough: the accumulator's day maximum is the total
        t.rows.push_back(make_row("occ1", start, 0, total / 2));
        t.rows.push_back(make_row("occ1", start + 1, 0, total));
    };
    add_day({2017, 9, 12}, 400);
    add_day({2017, 9, 13}, 420);
    add_day({2017, 9, 16}, 500);

    const auto baselines =
        compute_baselines(t, DateRange{{2017, 9, 11}, {2017, 9, 17}});
    CHECK(baselines.at("occ1").at("fan")[0] == doctest::Approx(410.0));
    CHECK(baselines.at("occ1").at("fan")[1] == doctest::Approx(500.0));
}

TEST_CASE("baselines demand at least one day per daytype") {
    MinuteTable t;
    t.resources = {"fan"};
    t.rows.push_back(make_row("occ1", start_of_date({2017, 9, 12}), 0, 100));
    CHECK_THROWS_AS(compute_baselines(t, DateRange{{2017, 9, 11}, {2017, 9, 15}}),
                    MissingBaselineData);
}

TEST_CASE("baselines ignore row order and occupant permutation") {
    MinuteTable t1, t2;
    t1.resources = t2.resources = {"fan"};
    auto rows = [&](const std::string& occ, double scale) {
        std::vector<MinuteRecord> out;
        for (int d = 0; d < 7; ++d) {
            const Minute start = start_of_date({2017, 9, 12}) + d * kMinutesPerDay;
            out.push_back(make_row(occ, start, 0, scale * (d + 1)));
        }
        return out;
    };
    for (const auto& r : rows("a", 10)) t1.rows.push_back(r);
    for (const auto& r : rows("b", 20)) t1.rows.push_back(r);
    for (const auto& r : rows("b", 20)) t2.rows.push_back(r);
    for (const auto& r : rows("a", 10)) t2.rows.push_back(r);
    const DateRange range{{2017, 9, 12}, {2017, 9, 18}};
    const auto b1 = compute_baselines(t1, range);
    const auto b2 = compute_baselines(t2, range);
    CHECK(b1.at("a").at("fan") == b2.at("a").at("fan"));
    CHECK(b1.at("b").at("fan") == b2.at("b").at("fan"));
}

TEST_CASE("split_periods partitions rows") {
    MinuteTable t;
    t.resources = {"fan"};
    for (int d = 0; d < 10; ++d) {
        t.rows.push_back(make_row("occ1", start_of_date({2017, 9, 12}) + d * kMinutesPerDay, 0, 1));
    }
    const auto [train, test] =
        split_periods(t, {{2017, 9, 12}, {2017, 9, 18}}, {{2017, 9, 19}, {2017, 9, 21}});
    CHECK(train.n_rows() == 7);
    CHECK(test.n_rows() == 3);

    CHECK_THROWS_AS(
        split_periods(t, {{2017, 9, 12}, {2017, 9, 18}}, {{2017, 9, 18}, {2017, 9, 21}}),
        OverlapError);

    // an empty test interval yields (full, empty)
    const auto [all, none] =
        split_periods(t, {{2017, 9, 12}, {2017, 9, 21}}, {{2017, 10, 2}, {2017, 10, 1}});
    CHECK(all.n_rows() == 10);
    CHECK(none.n_rows() == 0);
}

TEST_CASE("split then concatenate reproduces the row multiset") {
    MinuteTable t;
    t.resources = {"fan"};
    Rng rng(3);
    for (int d = 0; d < 14; ++d) {
        const Minute start = start_of_date({2017, 9, 12}) + d * kMinutesPerDay;
        t.rows.push_back(make_row("occ1", start, rng.bernoulli(0.5), 1));
    }
    const DateRange train{{2017, 9, 12}, {2017, 9, 17}};
    const DateRange test{{2017, 9, 20}, {2017, 9, 23}};
    const auto [a, b] = split_periods(t, train, test);
    std::size_t dropped = 0;
    for (const auto& r : t.rows) {
        const CivilDate d = date_of(r.timestamp);
        if (!train.contains(d) && !test.contains(d)) ++dropped;
    }
    CHECK(a.n_rows() + b.n_rows() + dropped == t.n_rows());
}
