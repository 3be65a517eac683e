#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sgame/errors.hpp"
#include "sgame/minute_table.hpp"
#include "sgame/simulate.hpp"

using namespace sgame;

namespace {

// iid standard-normal "synthetic" weather channels make the ground truth easy
// to reason about
ExogenousModel noise_exo(std::uint64_t seed) {
    ExogenousModel exo;
    exo.temperature = {0.0, 0.0, 0, 1.0};
    exo.humidity = {50.0, 0.0, 0, 1.0};
    exo.solar = {0.0, 0.0, 0, 1.0};
    exo.clamp_solar_nonnegative = false;
    exo.seed = seed;
    return exo;
}

GameConfig simple_game(const std::vector<std::string>& resources) {
    GameConfig game;
    for (const auto& r : resources) {
        game.baselines[r] = {480.0, 480.0};
        game.boosters[r] = 10.0;
    }
    return game;
}

OccupantProfile two_feature_profile(const std::string& id, double b1, double b2) {
    OccupantProfile p;
    p.occupant_id = id;
    ResourceUtility u;
    u.features = {"ext_temperature", "ext_solar"};
    u.beta = Eigen::Vector2d(b1, b2);
    p.utilities.emplace_back("desk_light", u);
    return p;
}

}  // namespace

TEST_CASE("gumbel choice matches the logit closed form") {
    Rng rng(1);
    const std::vector<double> even{0.0, 0.0};
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += sample_gumbel_choice(even, rng) == 1;
    CHECK(std::fabs(first / 10000.0 - 0.5) < 0.02);

    const std::vector<double> tilted{1.0, 0.0};
    int hits = 0;
    for (int i = 0; i < 20000; ++i) hits += sample_gumbel_choice(tilted, rng) == 0;
    CHECK(std::fabs(hits / 20000.0 - 0.7310585786300049) < 0.01);

    const std::vector<double> lone{3.0};
    for (int i = 0; i < 10; ++i) CHECK(sample_gumbel_choice(lone, rng) == 0);
    CHECK_THROWS_AS(sample_gumbel_choice(std::vector<double>{}, rng), EmptyChoiceSet);
}

TEST_CASE("multinomial-logit consistency within 3-sigma binomial bounds") {
    Rng rng(7);
    const std::vector<double> utilities{0.3, -0.5, 1.2};
    const std::vector<double> p = logit_choice_probabilities(utilities);
    const int n = 100000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) counts[sample_gumbel_choice(utilities, rng)]++;
    for (std::size_t k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(p[k] * (1 - p[k]) / n);
        CHECK(std::fabs(counts[k] / static_cast<double>(n) - p[k]) < 3 * sigma + 1e-9);
    }

    // a Gumbel scale widens the noise: probabilities follow softmax(u / scale)
    const std::vector<double> ps = logit_choice_probabilities(utilities, 2.0);
    std::vector<int> counts_s(3, 0);
    for (int i = 0; i < n; ++i) counts_s[sample_gumbel_choice(utilities, rng, 2.0)]++;
    for (std::size_t k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(ps[k] * (1 - ps[k]) / n);
        CHECK(std::fabs(counts_s[k] / static_cast<double>(n) - ps[k]) < 3 * sigma + 1e-9);
    }
}

TEST_CASE("adding a constant to every utility never changes the choice") {
    const std::vector<double> base{0.2, -1.0, 0.7, 0.0};
    std::vector<double> shifted(base);
    for (double& u : shifted) u += 123.45;
    for (int trial = 0; trial < 500; ++trial) {
        Rng a(1000 + trial), b(1000 + trial);  // identical noise draws
        CHECK(sample_gumbel_choice(base, a) == sample_gumbel_choice(shifted, b));
    }
}

TEST_CASE("symmetric profile turns the resource on about half the time") {
    OccupantProfile p;
    p.occupant_id = "occ1";
    ResourceUtility u;
    u.features = {"intercept"};
    u.beta = Eigen::VectorXd::Zero(1);
    p.utilities.emplace_back("fan", u);

    Rng rng(3);
    const MinuteTable t =
        simulate_occupant(p, noise_exo(3), kMinutesPerDay, simple_game({"fan"}), rng);
    CHECK(t.n_rows() == kMinutesPerDay);
    double on = 0;
    for (const auto& r : t.rows) on += r.states[0];
    CHECK(std::fabs(on / kMinutesPerDay - 0.5) < 0.03);
    t.validate();
}

TEST_CASE("a dominant off-utility keeps the resource off") {
    OccupantProfile p;
    p.occupant_id = "occ1";
    ResourceUtility u;
    u.features = {"intercept"};
    u.beta = Eigen::VectorXd::Constant(1, -10.0);
    p.utilities.emplace_back("fan", u);
    Rng rng(4);
    const MinuteTable t =
        simulate_occupant(p, noise_exo(4), 2 * kMinutesPerDay, simple_game({"fan"}), rng);
    double on = 0;
    for (const auto& r : t.rows) on += r.states[0];
    CHECK(on / static_cast<double>(t.n_rows()) < 0.001);
}

TEST_CASE("identical seeds reproduce byte-identical tables") {
    const OccupantProfile p = two_feature_profile("occ1", 1.0, -0.5);
    const GameConfig game = simple_game({"desk_light"});
    Rng r1(99), r2(99);
    const MinuteTable a = simulate_occupant(p, noise_exo(5), kMinutesPerDay, game, r1);
    const MinuteTable b = simulate_occupant(p, noise_exo(5), kMinutesPerDay, game, r2);
    std::ostringstream sa, sb;
    write_minutes(sa, a);
    write_minutes(sb, b);
    CHECK(sa.str() == sb.str());

    CHECK_THROWS_AS(simulate_occupant(p, noise_exo(5), 100, game, r1), InvalidHorizon);
}

TEST_CASE("points settle at day end with the points formula") {
    OccupantProfile p;
    p.occupant_id = "occ1";
    ResourceUtility u;
    u.features = {"intercept"};
    u.beta = Eigen::VectorXd::Constant(1, 10.0);  // always on
    p.utilities.emplace_back("fan", u);
    GameConfig game = simple_game({"fan"});
    Rng rng(6);
    const MinuteTable t = simulate_occupant(p, noise_exo(6), kMinutesPerDay, game, rng);
    const MinuteRecord& last = t.rows.back();
    CHECK(last.usage[0] == doctest::Approx(1440.0));
    // all-day usage of 1440 against a 480 baseline at booster 10
    CHECK(last.points_total == doctest::Approx(compute_points(480.0, 1440.0, 10.0)));
    CHECK(t.rows[t.n_rows() - 2].points_total == 0.0);  // not yet settled
}

TEST_CASE("cohort: shared exogenous draws, per-occupant noise, daily ranks") {
    std::vector<OccupantProfile> profiles;
    for (int i = 0; i < 3; ++i) {
        profiles.push_back(two_feature_profile("occ" + std::to_string(i + 1), 0.5, 0.0));
    }
    const GameConfig game = simple_game({"desk_light"});
    Rng rng(11);
    const MinuteTable t = simulate_cohort(profiles, noise_exo(11), kMinutesPerDay, game, rng);
    CHECK(t.n_rows() == 3 * kMinutesPerDay);
    CHECK(t.present.rank);
    t.validate();

    // same exogenous values at the same timestamp across occupants
    const auto spans = t.occupant_spans();
    REQUIRE(spans.size() == 3);
    for (std::size_t m = 0; m < 10; ++m) {
        const double temp0 = t.rows[spans[0].first + m].ext_temperature;
        CHECK(t.rows[spans[1].first + m].ext_temperature == temp0);
        CHECK(t.rows[spans[2].first + m].ext_temperature == temp0);
    }

    // identical profiles, distinct choice streams: the tables differ
    bool any_difference = false;
    for (std::size_t m = 0; m < static_cast<std::size_t>(kMinutesPerDay); ++m) {
        if (t.rows[spans[0].first + m].states[0] != t.rows[spans[1].first + m].states[0]) {
            any_difference = true;
            break;
        }
    }
    CHECK(any_difference);

    // ranks at the day-end minute form a permutation of 1..3
    std::set<int> ranks;
    for (const auto& [first, last] : spans) ranks.insert(t.rows[last - 1].rank);
    CHECK(ranks == std::set<int>{1, 2, 3});

    std::vector<OccupantProfile> dup{profiles[0], profiles[0]};
    CHECK_THROWS_AS(simulate_cohort(dup, noise_exo(1), kMinutesPerDay, game, rng),
                    DuplicateOccupantId);
}

TEST_CASE("bayes-optimal scorer: separability, null model, seed stability") {
    const GameConfig game = simple_game({"desk_light"});

    // near-deterministic: huge utility gap against unit noise
    const OccupantProfile sharp = two_feature_profile("occ1", 50.0, 0.0);
    Rng r1(21);
    const MinuteTable tsharp = simulate_occupant(sharp, noise_exo(21), 5 * kMinutesPerDay, game, r1);
    CHECK(bayes_optimal_auc(sharp, tsharp) > 0.995);

    // uninformative scorer sits at one half
    OccupantProfile null_profile = two_feature_profile("occ1", 0.0, 0.0);
    Rng r2(22);
    const MinuteTable tnull =
        simulate_occupant(null_profile, noise_exo(22), 5 * kMinutesPerDay, game, r2);
    // labels are coin flips, so any scorer lands near one half
    CHECK(std::fabs(bayes_optimal_auc(two_feature_profile("occ1", 1.0, 1.0), tnull) - 0.5) < 0.02);

    // Monte Carlo self-consistency across seeds
    const OccupantProfile truth = two_feature_profile("occ1", 2.0, -1.0);
    double aucs[2];
    for (int s = 0; s < 2; ++s) {
        Rng r(30 + s);
        const MinuteTable t =
            simulate_occupant(truth, noise_exo(static_cast<std::uint64_t>(40 + s)),
                              14 * kMinutesPerDay, game, r);
        aucs[s] = bayes_optimal_auc(truth, t);
    }
    CHECK(std::fabs(aucs[0] - aucs[1]) < 0.01);

    // all-identical states cannot be scored
    OccupantProfile always = two_feature_profile("occ1", 0.0, 0.0);
    always.utilities[0].second.features = {"intercept"};
    always.utilities[0].second.beta = Eigen::VectorXd::Constant(1, 30.0);
    Rng r3(23);
    const MinuteTable tconst =
        simulate_occupant(always, noise_exo(23), kMinutesPerDay, game, r3);
    CHECK_THROWS_AS(bayes_optimal_auc(always, tconst), DegenerateLabels);
}

TEST_CASE("exogenous humidity stays in [0,100] and day flags are one-hot") {
    ExogenousModel exo;
    exo.humidity = {5.0, 30.0, 240, 20.0};  // wide swings force the clamp
    exo.seed = 99;
    const ExoSeries series = generate_exogenous(exo, 3 * kMinutesPerDay);
    bool clamped_low = false;
    for (double h : series.humidity) {
        CHECK(h >= 0.0);
        CHECK(h <= 100.0);
        clamped_low = clamped_low || h == 0.0;
    }
    CHECK(clamped_low);  // the configuration actually exercises the clamp

    // morning/afternoon/evening exclude one another at every minute
    for (int mod : {0, 359, 360, 719, 720, 1079, 1080, 1439}) {
        const int morning = mod >= 360 && mod < 720;
        const int afternoon = mod >= 720 && mod < 1080;
        const int evening = mod >= 1080;
        CHECK(morning + afternoon + evening <= 1);
    }
}

TEST_CASE("simulated tables round-trip through the delimited format") {
    const OccupantProfile p = two_feature_profile("occ1", 1.0, -1.0);
    Rng rng(77);
    const MinuteTable t =
        simulate_occupant(p, noise_exo(77), kMinutesPerDay, simple_game({"desk_light"}), rng);
    std::ostringstream out;
    write_minutes(out, t);
    std::istringstream in(out.str());
    const MinuteTable back = ingest_minutes(in, {});
    REQUIRE(back.n_rows() == t.n_rows());
    for (std::size_t i = 0; i < t.n_rows(); i += 97) {
        CHECK(back.rows[i].states == t.rows[i].states);
        CHECK(back.rows[i].usage == t.rows[i].usage);
        CHECK(back.rows[i].ext_temperature == t.rows[i].ext_temperature);
        CHECK(back.rows[i].points_total == t.rows[i].points_total);
    }

    // lagged own-state features are reconstructable from the round-tripped table
    OccupantProfile lagged = p;
    lagged.utilities[0].second.features = {"intercept", "lag1"};
    lagged.utilities[0].second.beta = Eigen::Vector2d(0.0, 2.0);
    Rng r2(78);
    const MinuteTable tl = simulate_occupant(lagged, noise_exo(78), 2 * kMinutesPerDay,
                                             simple_game({"desk_light"}), r2);
    const double auc_direct = bayes_optimal_auc(lagged, tl);
    std::ostringstream out2;
    write_minutes(out2, tl);
    std::istringstream in2(out2.str());
    const double auc_roundtrip = bayes_optimal_auc(lagged, ingest_minutes(in2, {}));
    CHECK(auc_direct == doctest::Approx(auc_roundtrip).epsilon(1e-12));
}
