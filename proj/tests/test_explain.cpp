#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "sgame/errors.hpp"
#include "sgame/granger.hpp"
#include "sgame/lasso.hpp"
#include "sgame/rng.hpp"
#include "sgame/special.hpp"
#include "sgame/stratify.hpp"

using namespace sgame;

namespace {

// dense zooming-grid minimizer of the lasso objective; independent of the
// coordinate-descent path
Eigen::Vector3d lasso_grid_oracle(const LassoProblem& problem) {
    Eigen::Vector3d center(0, 0, 0);
    double range = 2.0;
    Eigen::Vector3d best = center;
    for (int pass = 0; pass < 8; ++pass) {
        double best_obj = std::numeric_limits<double>::infinity();
        Eigen::Vector3d pass_best = center;
        const int steps = 21;
        const double h = 2.0 * range / (steps - 1);
        for (int a = 0; a < steps; ++a) {
            for (int b = 0; b < steps; ++b) {
                for (int c = 0; c < steps; ++c) {
                    Eigen::Vector3d beta(center(0) - range + a * h, center(1) - range + b * h,
                                         center(2) - range + c * h);
                    const double obj = lasso_objective(problem, beta);
                    if (obj < best_obj) {
                        best_obj = obj;
                        pass_best = beta;
                    }
                }
            }
        }
        best = pass_best;
        center = pass_best;
        range = 2.5 * h;  // margin of a couple of grid steps each side
    }
    return best;
}

Eigen::MatrixXd standardized_chain(int n, int H, double a, Rng& rng) {
    Eigen::MatrixXd Y(n, H);
    for (int i = 0; i < n; ++i) {
        Y(i, 0) = rng.normal();
        for (int j = 1; j < H; ++j) Y(i, j) = a * Y(i, j - 1) + rng.normal();
    }
    for (int j = 0; j < H; ++j) {
        const double m = Y.col(j).mean();
        const double sd = std::sqrt((Y.col(j).array() - m).square().mean());
        Y.col(j) = (Y.col(j).array() - m) / sd;
    }
    return Y;
}

}  // namespace

TEST_CASE("soft threshold formula") {
    CHECK(soft_threshold(2.5, 1.0) == 1.5);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-2.5, 1.0) == -1.5);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double theta = rng.uniform(-10, 10);
        CHECK(soft_threshold(theta, 0.0) == theta);
    }
}

TEST_CASE("lasso_cd at lambda 0 matches the normal equations") {
    Rng rng(2);
    const int n = 60;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y(i) = 1.5 * X(i, 0) - 0.7 * X(i, 2) + 0.3 * rng.normal();
    }
    for (int j = 0; j < 3; ++j) X.col(j).array() -= X.col(j).mean();
    y.array() -= y.mean();

    LassoProblem p{y, X, 0.0, 1e-12, 20000};
    const LassoResult fit = lasso_cd(p);
    CHECK(fit.converged);
    const Eigen::Vector3d ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    CHECK((fit.beta - ols).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("lasso_cd returns the exact zero vector at and above lambda_max") {
    Rng rng(3);
    const int n = 50;
    Eigen::MatrixXd Y(n, 4);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) Y(i, j) = rng.normal() + (j == 0 ? 0.0 : 0.3 * Y(i, 0));
    }
    for (int j = 0; j < 4; ++j) Y.col(j).array() -= Y.col(j).mean();
    const auto grid = lambda_grid(Y, 0);

    Eigen::MatrixXd X(n, 3);
    X << Y.col(1), Y.col(2), Y.col(3);
    for (double lambda : {grid[0], grid[0] * 1.5, grid[0] * 10.0}) {
        LassoProblem p{Y.col(0), X, lambda, 1e-10, 100};
        const LassoResult fit = lasso_cd(p);
        CHECK(fit.beta.isZero(0.0));  // exactly zero, not approximately
        CHECK(fit.converged);
    }
}

TEST_CASE("lasso_cd matches the dense-grid oracle and satisfies the KKT conditions") {
    for (int seed = 0; seed < 5; ++seed) {
        Rng rng(100 + seed);
        const int n = 40;
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
            y(i) = 0.9 * X(i, 0) - 0.4 * X(i, 1) + 0.5 * rng.normal();
        }
        for (int j = 0; j < 3; ++j) X.col(j).array() -= X.col(j).mean();
        y.array() -= y.mean();

        LassoProblem p{y, X, 0.1, 1e-12, 50000};
        const LassoResult fit = lasso_cd(p);
        const Eigen::Vector3d oracle = lasso_grid_oracle(p);
        CHECK((fit.beta - oracle).lpNorm<Eigen::Infinity>() < 1e-4);

        // subgradient optimality at the returned iterate
        const Eigen::VectorXd r = y - X * fit.beta;
        for (int j = 0; j < 3; ++j) {
            const double corr = X.col(j).dot(r) / n;
            if (fit.beta(j) == 0.0) {
                CHECK(std::fabs(corr) <= p.lambda + 1e-8);
            } else {
                CHECK(corr == doctest::Approx(p.lambda * (fit.beta(j) > 0 ? 1.0 : -1.0))
                                  .epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("lasso objective is nonincreasing across sweeps") {
    Rng rng(7);
    const int n = 30;
    Eigen::MatrixXd X(n, 5);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 5; ++j) X(i, j) = rng.normal();
        y(i) = X(i, 0) - X(i, 3) + 0.2 * rng.normal();
    }
    for (int j = 0; j < 5; ++j) X.col(j).array() -= X.col(j).mean();
    y.array() -= y.mean();

    double prev = std::numeric_limits<double>::infinity();
    for (int sweeps = 1; sweeps <= 12; ++sweeps) {
        LassoProblem p{y, X, 0.05, 0.0, sweeps};  // tol 0 forces exactly `sweeps` passes
        const LassoResult fit = lasso_cd(p);
        const double obj = lasso_objective(p, fit.beta);
        CHECK(obj <= prev + 1e-12);
        prev = obj;
    }
}

TEST_CASE("solution sparsity never grows as lambda falls along the grid") {
    Rng rng(71);
    const int n = 200;
    Eigen::MatrixXd Y(n, 6);
    for (int i = 0; i < n; ++i) {
        Y(i, 0) = rng.normal();
        for (int j = 1; j < 6; ++j) Y(i, j) = 0.4 * Y(i, 0) + rng.normal();
    }
    for (int j = 0; j < 6; ++j) Y.col(j).array() -= Y.col(j).mean();
    Eigen::MatrixXd X = Y.rightCols(5);
    const auto grid = lambda_grid(Y, 0);
    int prev_nnz = 0;
    for (double lambda : grid) {  // descending penalties
        LassoProblem p{Y.col(0), X, lambda, 1e-10, 5000};
        const LassoResult fit = lasso_cd(p);
        int nnz = 0;
        for (int j = 0; j < 5; ++j) nnz += fit.beta(j) != 0.0;
        CHECK(nnz >= prev_nnz);
        prev_nnz = nnz;
    }
    CHECK(prev_nnz > 0);  // the smallest penalty keeps something active
}

TEST_CASE("lambda grid: endpoints, spacing, direct arithmetic") {
    Eigen::MatrixXd Y(4, 2);
    Y << 1, 2, -1, 0.5, 2, -1, -2, -1.5;
    for (int j = 0; j < 2; ++j) Y.col(j).array() -= Y.col(j).mean();
    const auto grid = lambda_grid(Y, 0);
    const double expected = std::fabs(Y.col(1).dot(Y.col(0))) / 4.0;
    CHECK(grid[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(grid[9] == grid[0] / 100.0);  // exact endpoint
    for (int i = 0; i + 2 < 10; ++i) {
        CHECK(grid[i + 1] / grid[i] == doctest::Approx(grid[i + 2] / grid[i + 1]).epsilon(1e-12));
    }
    for (int i = 1; i < 10; ++i) CHECK(grid[i] < grid[i - 1]);

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);
    CHECK_THROWS_AS(lambda_grid(zero, 0), DegenerateDesign);
}

TEST_CASE("neighborhood glasso: single vertex, chain recovery, null model") {
    Rng tiny_rng(1);
    Eigen::MatrixXd one = Eigen::MatrixXd::Random(20, 1);
    const DependenceGraph g1 = neighborhood_glasso(one, {"only"}, tiny_rng);
    CHECK(g1.edges.empty());

    GlassoOptions opt;
    opt.one_se_rule = true;  // CV-min over a 10-point grid overselects; see ledger

    int chain_exact = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(500 + seed);
        const Eigen::MatrixXd Y = standardized_chain(2000, 3, 0.6, rng);
        Rng grng(600 + seed);
        const DependenceGraph g = neighborhood_glasso(Y, {"x1", "x2", "x3"}, grng, opt);
        chain_exact += g.edges.size() == 2 && g.has_edge(0, 1) && g.has_edge(1, 2);
    }
    CHECK(chain_exact >= 18);  // >= 90% of 20 seeded runs

    int null_empty = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(700 + seed);
        Eigen::MatrixXd Z(2000, 3);
        for (int i = 0; i < 2000; ++i) {
            for (int j = 0; j < 3; ++j) Z(i, j) = rng.normal();
        }
        for (int j = 0; j < 3; ++j) {
            const double m = Z.col(j).mean();
            const double sd = std::sqrt((Z.col(j).array() - m).square().mean());
            Z.col(j) = (Z.col(j).array() - m) / sd;
        }
        Rng grng(800 + seed);
        null_empty += neighborhood_glasso(Z, {"a", "b", "c"}, grng, opt).edges.empty();
    }
    CHECK(null_empty >= 18);
}

TEST_CASE("glasso is invariant to column permutation up to relabeling") {
    Rng rng(900);
    const Eigen::MatrixXd Y = standardized_chain(1500, 4, 0.6, rng);
    GlassoOptions opt;
    opt.one_se_rule = true;
    Rng g1(901);
    const DependenceGraph direct = neighborhood_glasso(Y, {"a", "b", "c", "d"}, g1, opt);

    // permute columns (reverse order) and map edges back
    Eigen::MatrixXd P(Y.rows(), 4);
    for (int j = 0; j < 4; ++j) P.col(j) = Y.col(3 - j);
    Rng g2(901);
    const DependenceGraph permuted = neighborhood_glasso(P, {"d", "c", "b", "a"}, g2, opt);
    auto canonical = [](const DependenceGraph& g) {
        std::set<std::pair<std::string, std::string>> names;
        for (const auto& [a, b] : g.edges) {
            std::string na = g.vertices[static_cast<std::size_t>(a)];
            std::string nb = g.vertices[static_cast<std::size_t>(b)];
            if (nb < na) std::swap(na, nb);
            names.insert({na, nb});
        }
        return names;
    };
    CHECK(canonical(direct) == canonical(permuted));
}

TEST_CASE("granger: planted coupling is detected decisively") {
    Rng rng(41);
    const std::size_t n = 1000;
    std::vector<double> x(n), y(n);
    x[0] = rng.normal();
    y[0] = rng.normal();
    for (std::size_t t = 1; t < n; ++t) {
        x[t] = 0.5 * x[t - 1] + rng.normal();
        y[t] = 0.8 * y[t - 1] + 0.5 * x[t - 1] + rng.normal();
    }
    const GrangerResult res = granger_test(x, y, 1);
    CHECK(res.p_value < 0.001);
    CHECK(res.reject);
    CHECK(res.f_statistic > 0.0);
    CHECK(res.rss_restricted > res.rss_unrestricted);

    // the reverse direction shows no coupling
    const GrangerResult rev = granger_test(y, x, 1);
    CHECK_FALSE(rev.p_value < 0.001);
}

TEST_CASE("granger test size sits near the significance level") {
    int rejections = 0;
    const int trials = 400;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(2000 + trial);
        std::vector<double> x(300), y(300);
        for (std::size_t t = 0; t < x.size(); ++t) {
            x[t] = rng.normal();
            y[t] = rng.normal();
        }
        rejections += granger_test(x, y, 1).reject;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate > 0.02);
    CHECK(rate < 0.08);
}

TEST_CASE("granger: affine rescaling of either series leaves F unchanged") {
    Rng rng(43);
    std::vector<double> x(400), y(400);
    x[0] = rng.normal();
    y[0] = rng.normal();
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = 0.4 * x[t - 1] + rng.normal();
        y[t] = 0.6 * y[t - 1] + 0.3 * x[t - 1] + rng.normal();
    }
    const double f0 = granger_test(x, y, 2).f_statistic;
    std::vector<double> xs(x), ys(y);
    for (double& v : xs) v = 7.0 * v - 3.0;
    for (double& v : ys) v = -0.5 * v + 10.0;
    const double f1 = granger_test(xs, ys, 2).f_statistic;
    CHECK(std::fabs(f0 - f1) < 1e-8);
}

TEST_CASE("granger p-value falls monotonically in F for fixed dof") {
    double prev_p = 1.1;
    for (double f : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double p = f_distribution_sf(f, 2.0, 100.0);
        CHECK(p < prev_p + 1e-15);
        prev_p = p;
    }
}

TEST_CASE("granger guards: short series, bad lag, collinear lags") {
    std::vector<double> x{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(granger_test(x, x, 2), SeriesTooShort);
    CHECK_THROWS_AS(granger_test(x, x, 0), Error);

    // constant x lags are collinear with the intercept
    std::vector<double> constant(50, 1.0), y(50);
    Rng rng(44);
    for (double& v : y) v = rng.normal();
    CHECK_THROWS_AS(granger_test(constant, y, 1), RankDeficient);
}

TEST_CASE("BIC lag scan lands on the planted order") {
    Rng rng(61);
    const std::size_t n = 2000;
    std::vector<double> x(n), y(n);
    x[0] = x[1] = rng.normal();
    y[0] = y[1] = rng.normal();
    for (std::size_t t = 2; t < n; ++t) {
        x[t] = 0.4 * x[t - 1] + rng.normal();
        // y depends on x two steps back only
        y[t] = 0.5 * y[t - 1] + 0.6 * x[t - 2] + rng.normal();
    }
    const int lag = granger_select_lag_bic(x, y, 5);
    CHECK(lag == 2);
    const GrangerResult res = granger_test(x, y, lag);
    CHECK(res.reject);
}

TEST_CASE("stratification splits, remainders, representatives") {
    std::map<std::string, int> nine;
    for (int i = 1; i <= 9; ++i) nine["p" + std::to_string(i)] = i;
    const PlayerClasses c9 = stratify_players(nine);
    CHECK(c9.high == std::vector<std::string>{"p1", "p2", "p3"});
    CHECK(c9.medium == std::vector<std::string>{"p4", "p5", "p6"});
    CHECK(c9.low == std::vector<std::string>{"p7", "p8", "p9"});
    CHECK(c9.representative_high == "p2");  // median of ranks {1,2,3}
    CHECK(c9.representative_medium == "p5");
    CHECK(c9.representative_low == "p8");

    std::map<std::string, int> ten;
    for (int i = 1; i <= 10; ++i) ten["p" + std::to_string(i)] = i;
    const PlayerClasses c10 = stratify_players(ten);
    CHECK(c10.high.size() == 4);
    CHECK(c10.medium.size() == 3);
    CHECK(c10.low.size() == 3);
    CHECK(c10.representative_high == "p2");  // lower rank of the two middles

    std::map<std::string, int> two{{"a", 1}, {"b", 2}};
    CHECK_THROWS_AS(stratify_players(two), TooFewPlayers);
    std::map<std::string, int> tied{{"a", 1}, {"b", 1}, {"c", 2}};
    CHECK_THROWS_AS(stratify_players(tied), Error);
}
