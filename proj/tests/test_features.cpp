#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/feature_matrix.hpp"
#include "sgame/minute_table.hpp"
#include "sgame/mutual_info.hpp"
#include "sgame/pooling.hpp"
#include "sgame/smote.hpp"

using namespace sgame;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows,
                          const std::vector<ColumnInfo>& cols) {
    FeatureMatrix X;
    X.columns = cols;
    X.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return X;
}

}  // namespace

TEST_CASE("standardize: closed form, round trip, degenerate column") {
    FeatureMatrix X = make_matrix({{1}, {2}, {3}}, {{"x", ColumnTag::external}});
    auto [Z, scaler] = standardize(X);
    CHECK(Z.values(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(Z.values(1, 0) == doctest::Approx(0.0));
    CHECK(Z.values(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    CHECK(std::fabs(Z.values.col(0).mean()) < 1e-10);
    const double sd = std::sqrt((Z.values.col(0).array() - Z.values.col(0).mean()).square().mean());
    CHECK(std::fabs(sd - 1.0) < 1e-10);

    const Eigen::MatrixXd back = scaler.invert(Z.values);
    CHECK((back - X.values).cwiseAbs().maxCoeff() < 1e-12);

    FeatureMatrix C = make_matrix({{5}, {5}, {5}}, {{"c", ColumnTag::external}});
    CHECK_THROWS_AS(standardize(C), ConstantColumn);

    // dummies pass through untouched
    FeatureMatrix D = make_matrix({{1, 0}, {2, 1}, {3, 0}},
                                  {{"x", ColumnTag::external}, {"d", ColumnTag::dummy}});
    auto [Zd, sd2] = standardize(D);
    CHECK(Zd.values(0, 1) == 0.0);
    CHECK(Zd.values(1, 1) == 1.0);
}

TEST_CASE("standardize round trip on random matrices") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + rng.uniform_index(30);
        FeatureMatrix X;
        X.columns = {{"a", ColumnTag::external}, {"b", ColumnTag::iot}, {"d", ColumnTag::dummy}};
        X.values.resize(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) {
            X.values(static_cast<Eigen::Index>(i), 0) = rng.uniform(-50, 50);
            X.values(static_cast<Eigen::Index>(i), 1) = 1000 + 3 * rng.normal();
            X.values(static_cast<Eigen::Index>(i), 2) = rng.bernoulli(0.5);
        }
        auto [Z, scaler] = standardize(X);
        CHECK((scaler.invert(Z.values) - X.values).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((scaler.apply(X.values) - Z.values).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("mutual information identities") {
    // y identical to x: MI = H(x)
    std::vector<double> x{0, 0, 1, 1, 2, 2, 2, 0};
    CHECK(mutual_information(x, x, 3) == doctest::Approx(binned_entropy(x, 3)).epsilon(1e-12));

    // XOR: each input alone is independent of the target, jointly they decide it
    std::vector<double> x1, x2, y;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int rep = 0; rep < 25; ++rep) {
                x1.push_back(a);
                x2.push_back(b);
                y.push_back(a ^ b);
            }
        }
    }
    CHECK(mutual_information(x1, y, 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mutual_information(x2, y, 2) == doctest::Approx(0.0).epsilon(1e-12));
    // joint (x1, x2) encoded as a single 4-level column
    std::vector<double> joint(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) joint[i] = 2 * x1[i] + x2[i];
    CHECK(mutual_information(joint, y, 4) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mutual information is symmetric bit-for-bit and nearly zero under independence") {
    Rng rng(13);
    std::vector<double> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.bernoulli(0.5);
        y[i] = rng.bernoulli(0.5);
    }
    CHECK(mutual_information(x, y, 2) < 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(200), b(200);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = rng.uniform(-1, 1);
            b[i] = rng.uniform(-1, 1) + 0.5 * a[i];
        }
        const double ab = mutual_information(a, b, 8);
        const double ba = mutual_information(b, a, 8);
        CHECK(ab == ba);  // exact, not approximate
        CHECK(ab >= 0.0);
        CHECK(ab <= std::min(binned_entropy(a, 8), binned_entropy(b, 8)) + 1e-12);
    }
    CHECK_THROWS_AS(mutual_information(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}, 2),
                    LengthMismatch);
}

TEST_CASE("mrmr: first pick is pure relevance, duplicates are skipped") {
    Rng rng(29);
    const std::size_t n = 400;
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.bernoulli(0.5);
        // informative up to a few flips; a bit of noise keeps the duplicate's
        // redundancy strictly above its relevance
        rows[i][0] = rng.bernoulli(0.05) ? 1 - y[i] : y[i];
        rows[i][1] = rows[i][0];       // exact duplicate
        rows[i][2] = rng.uniform01();  // noise
    }
    FeatureMatrix X = make_matrix(rows, {{"x1", ColumnTag::external},
                                         {"x2", ColumnTag::external},
                                         {"x3", ColumnTag::external}});
    const auto one = mrmr_select(X, y, 1);
    CHECK(one == std::vector<int>{0});
    const auto two = mrmr_select(X, y, 2);
    CHECK(two[0] == 0);
    CHECK(two[1] == 2);  // the copy is fully redundant
    CHECK_THROWS_AS(mrmr_select(X, y, 4), KOutOfRange);
    CHECK_THROWS_AS(mrmr_select(X, y, 0), KOutOfRange);
}

TEST_CASE("mrmr is prefix-stable with no duplicate picks") {
    Rng rng(31);
    const std::size_t n = 300, d = 8;
    FeatureMatrix X;
    for (std::size_t j = 0; j < d; ++j) {
        X.columns.push_back({"f" + std::to_string(j), ColumnTag::external});
    }
    X.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.bernoulli(0.5);
        for (std::size_t j = 0; j < d; ++j) {
            X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rng.normal() + (j % 3 == 0 ? 1.5 * y[i] : 0.0);
        }
    }
    const auto full = mrmr_select(X, y, d);
    std::vector<int> seen(full.begin(), full.end());
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    for (std::size_t k = 1; k < d; ++k) {
        const auto prefix = mrmr_select(X, y, k);
        for (std::size_t i = 0; i < k; ++i) CHECK(prefix[i] == full[i]);
    }
}

TEST_CASE("smote balances classes exactly and stays on minority segments") {
    Rng rng(41);
    const std::size_t n_min = 10, n_maj = 100;
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n_maj; ++i) {
        rows.push_back({rng.uniform(10, 20), rng.uniform(10, 20)});
        y.push_back(0);
    }
    for (std::size_t i = 0; i < n_min; ++i) {
        rows.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
        y.push_back(1);
    }
    FeatureMatrix X = make_matrix(rows, {{"a", ColumnTag::external}, {"b", ColumnTag::external}});
    Rng smote_rng(1);
    const auto [Xb, yb] = smote(X, y, 5, smote_rng);
    CHECK(Xb.n_rows() == 2 * n_maj);
    std::size_t pos = 0;
    for (int v : yb) pos += static_cast<std::size_t>(v);
    CHECK(pos == n_maj);

    // originals preserved verbatim
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        CHECK(Xb.values.row(static_cast<Eigen::Index>(i)) ==
              X.values.row(static_cast<Eigen::Index>(i)));
        CHECK(yb[i] == y[i]);
    }

    // every synthetic row is a convex combination of two minority rows
    for (std::size_t s = X.n_rows(); s < Xb.n_rows(); ++s) {
        const Eigen::RowVector2d row = Xb.values.row(static_cast<Eigen::Index>(s));
        bool on_some_segment = false;
        for (std::size_t a = n_maj; a < n_maj + n_min && !on_some_segment; ++a) {
            for (std::size_t b = n_maj; b < n_maj + n_min; ++b) {
                if (a == b) continue;
                const Eigen::RowVector2d p = X.values.row(static_cast<Eigen::Index>(a));
                const Eigen::RowVector2d q = X.values.row(static_cast<Eigen::Index>(b));
                const Eigen::RowVector2d d = q - p;
                const double denom = d.squaredNorm();
                if (denom == 0.0) continue;
                const double u = (row - p).dot(d) / denom;
                if (u < -1e-9 || u > 1.0 + 1e-9) continue;
                if ((p + u * d - row).norm() < 1e-9) {
                    on_some_segment = true;
                    break;
                }
            }
        }
        CHECK(on_some_segment);
    }

    std::vector<int> tiny_y(X.n_rows(), 0);
    tiny_y[0] = 1;  // minority of one
    Rng r2(2);
    CHECK_THROWS_AS(smote(X, tiny_y, 5, r2), MinorityTooSmall);
}

namespace {

MinuteTable pooled_fixture() {
    MinuteTable t;
    t.resources = {"desk_light", "fan"};
    t.present.ext_temperature = true;
    t.present.ext_humidity = true;
    Rng rng(55);
    // Sep 15 2017 is a Friday; two days cover a weekday and a Saturday
    const Minute start = start_of_date({2017, 9, 15});
    for (int m = 0; m < 2 * kMinutesPerDay; ++m) {
        MinuteRecord r;
        r.occupant_id = "occ1";
        r.timestamp = start + m;
        const int mod = minute_of_day(r.timestamp);
        r.states = {static_cast<std::uint8_t>(rng.bernoulli(0.3)),
                    static_cast<std::uint8_t>(rng.bernoulli(0.6))};
        if (mod == 0) {
            r.usage = {static_cast<double>(r.states[0]), static_cast<double>(r.states[1])};
        } else {
            const MinuteRecord& prev = t.rows.back();
            r.usage = {prev.usage[0] + r.states[0], prev.usage[1] + r.states[1]};
        }
        r.ext_temperature = 28 + rng.normal();
        r.ext_humidity = 70 + rng.normal();
        r.points_total = 5.0;
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace

TEST_CASE("pooling emits dummies, lags, ratios and honors sensor-free") {
    const MinuteTable t = pooled_fixture();
    PoolingConfig pc;
    pc.target_resource = "desk_light";
    pc.lags = {1, 2};
    pc.baselines["desk_light"] = {200.0, 200.0};
    const FeatureMatrix X = pool_features(t, pc, PoolingMode::step_ahead);
    X.validate();

    // first two rows are consumed by the lag window
    CHECK(X.n_rows() == t.n_rows() - 2);
    const int wd = X.column_index("weekday");
    const int we = X.column_index("weekend");
    REQUIRE(wd >= 0);
    REQUIRE(we >= 0);
    // row at Saturday midnight: weekend dummy set, weekday clear
    const std::size_t sat_row = static_cast<std::size_t>(kMinutesPerDay) - 2;
    CHECK(X.values(static_cast<Eigen::Index>(sat_row), we) == 1.0);
    CHECK(X.values(static_cast<Eigen::Index>(sat_row), wd) == 0.0);
    // Friday rows are weekday
    CHECK(X.values(0, wd) == 1.0);
    CHECK(X.values(0, we) == 0.0);

    // lag columns align with the raw states
    const int lag1 = X.column_index("lag1:desk_light");
    REQUIRE(lag1 >= 0);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(X.values(static_cast<Eigen::Index>(i), lag1) ==
              static_cast<double>(t.rows[i + 1].states[0]));
        CHECK(X.target[i] == t.rows[i + 2].states[0]);
    }

    // usage fraction uses the previous minute's accumulator over the baseline
    const int frac = X.column_index("usage_frac:desk_light");
    REQUIRE(frac >= 0);
    CHECK(X.values(0, frac) == doctest::Approx(t.rows[1].usage[0] / 200.0));

    // sensor-free drops every IoT-derived column
    const FeatureMatrix free = pool_features(t, pc, PoolingMode::sensor_free);
    for (const auto& c : free.columns) {
        CHECK(c.tag != ColumnTag::iot);
        CHECK(c.tag != ColumnTag::resource);
    }
    CHECK(free.column_index("ext_temperature") >= 0);
    CHECK(free.column_index("lag1:desk_light") < 0);
    CHECK(free.column_index("points_total") >= 0);

    PoolingConfig bad = pc;
    bad.target_resource = "toaster";
    CHECK_THROWS_AS(pool_features(t, bad, PoolingMode::step_ahead), UnknownColumn);
    MinuteTable empty;
    empty.resources = {"desk_light"};
    CHECK_THROWS_AS(pool_features(empty, pc, PoolingMode::step_ahead), EmptyTable);
}

TEST_CASE("usage ratio example: 50 minutes over a 200-minute baseline") {
    MinuteTable t;
    t.resources = {"fan"};
    const Minute start = start_of_date({2017, 9, 12});
    for (int m = 0; m < 60; ++m) {
        MinuteRecord r;
        r.occupant_id = "o";
        r.timestamp = start + m;
        r.states = {1};
        r.usage = {static_cast<double>(m + 1)};
        t.rows.push_back(std::move(r));
    }
    PoolingConfig pc;
    pc.target_resource = "fan";
    pc.lags = {1};
    pc.baselines["fan"] = {200.0, 200.0};
    const FeatureMatrix X = pool_features(t, pc, PoolingMode::step_ahead);
    const int frac = X.column_index("usage_frac:fan");
    // the row whose previous-minute accumulator reads 50
    CHECK(X.values(49, frac) == doctest::Approx(0.25));
}
