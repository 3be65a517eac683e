#include "sgame/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "sgame/cross_validation.hpp"
#include "sgame/errors.hpp"
#include "sgame/stats.hpp"

namespace sgame {

double soft_threshold(double theta, double lambda) {
    return std::copysign(std::max(std::fabs(theta) - lambda, 0.0), theta);
}

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& beta) {
    const double n = static_cast<double>(problem.response.size());
    const double rss = (problem.response - problem.design * beta).squaredNorm();
    return rss / (2.0 * n) + problem.lambda * beta.lpNorm<1>();
}

LassoResult lasso_cd(const LassoProblem& problem) {
    const Eigen::Index n = problem.response.size();
    const Eigen::Index d = problem.design.cols();
    if (problem.design.rows() != n) throw LengthMismatch(problem.design.rows(), n);
    if (problem.lambda < 0.0) throw Error("lasso penalty must be nonnegative");

    const double nd = static_cast<double>(n);
    Eigen::VectorXd col_scale(d);  // (1/N) <X_j, X_j>
    for (Eigen::Index j = 0; j < d; ++j) {
        col_scale(j) = problem.design.col(j).squaredNorm() / nd;
    }

    LassoResult res;
    res.beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd r = problem.response;  // full residual y - X beta
    for (int sweep = 1; sweep <= problem.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (col_scale(j) <= 0.0) continue;  // constant-zero column stays out
            const double old = res.beta(j);
            // rho_j = (1/N) <r + X_j * old, X_j>; the division (not a
            // reciprocal multiply) keeps rho bit-identical to lambda_grid's
            // inner products so lambda >= lambda_max zeroes exactly
            const double rho = problem.design.col(j).dot(r) / nd + col_scale(j) * old;
            const double updated = soft_threshold(rho, problem.lambda) / col_scale(j);
            if (updated != old) {
                r += problem.design.col(j) * (old - updated);
                res.beta(j) = updated;
                max_delta = std::max(max_delta, std::fabs(updated - old));
            }
        }
        res.sweeps = sweep;
        res.last_delta = max_delta;
        if (max_delta < problem.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

std::array<double, 10> lambda_grid(const Eigen::MatrixXd& Y, int h) {
    const Eigen::Index n = Y.rows();
    const Eigen::Index cols = Y.cols();
    if (n < 2 || cols < 2) throw DegenerateDesign();
    double lambda_max = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
        if (j == h) continue;
        lambda_max = std::max(lambda_max, std::fabs(Y.col(j).dot(Y.col(h))) / static_cast<double>(n));
    }
    if (lambda_max <= 0.0) throw DegenerateDesign();
    const double lambda_min = lambda_max / 100.0;
    std::array<double, 10> grid;
    const double ratio = std::pow(lambda_min / lambda_max, 1.0 / 9.0);
    grid[0] = lambda_max;
    for (int i = 1; i < 9; ++i) grid[static_cast<std::size_t>(i)] = grid[static_cast<std::size_t>(i - 1)] * ratio;
    grid[9] = lambda_min;  // exact endpoint
    return grid;
}

bool DependenceGraph::has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end();
}

namespace {

// design matrix without column h
Eigen::MatrixXd drop_column(const Eigen::MatrixXd& Y, int h) {
    Eigen::MatrixXd X(Y.rows(), Y.cols() - 1);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        if (j == h) continue;
        X.col(c++) = Y.col(j);
    }
    return X;
}

}  // namespace

DependenceGraph neighborhood_glasso(const Eigen::MatrixXd& Y,
                                    const std::vector<std::string>& names, Rng& rng,
                                    const GlassoOptions& options) {
    const Eigen::Index n = Y.rows();
    const int H = static_cast<int>(Y.cols());
    if (names.size() != static_cast<std::size_t>(H)) throw LengthMismatch(names.size(), H);

    DependenceGraph graph;
    graph.vertices = names;
    graph.neighborhoods.resize(static_cast<std::size_t>(H));
    graph.chosen_lambda.assign(static_cast<std::size_t>(H), 0.0);
    if (H < 2) return graph;  // a single vertex has no candidate neighbors
    if (n < options.folds) throw FoldTooSmall("fewer rows than folds");

    std::vector<std::vector<std::uint8_t>> claims(
        static_cast<std::size_t>(H), std::vector<std::uint8_t>(static_cast<std::size_t>(H), 0));

    for (int h = 0; h < H; ++h) {
        const Eigen::MatrixXd X = drop_column(Y, h);
        const Eigen::VectorXd y = Y.col(h);
        const auto grid = lambda_grid(Y, h);

        // k-fold CV: mean held-out squared prediction error per lambda
        Rng fold_rng = rng.fork(static_cast<std::uint64_t>(h));
        const std::vector<int> folds =
            fold_assignment(static_cast<std::size_t>(n), options.folds, fold_rng);
        std::array<double, 10> cv_mean{};
        std::array<double, 10> cv_se{};
        std::array<std::vector<double>, 10> fold_losses;
        for (int f = 0; f < options.folds; ++f) {
            std::vector<Eigen::Index> train_rows, val_rows;
            for (Eigen::Index i = 0; i < n; ++i) {
                (folds[static_cast<std::size_t>(i)] == f ? val_rows : train_rows).push_back(i);
            }
            Eigen::MatrixXd Xtr(train_rows.size(), X.cols());
            Eigen::VectorXd ytr(train_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_rows[i]);
                ytr(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
            }
            for (std::size_t g = 0; g < grid.size(); ++g) {
                LassoProblem p{ytr, Xtr, grid[g], options.tol, options.max_sweeps};
                const LassoResult fit = lasso_cd(p);
                double loss = 0.0;
                for (Eigen::Index i : val_rows) {
                    const double e = y(i) - X.row(i).dot(fit.beta);
                    loss += e * e;
                }
                fold_losses[g].push_back(loss / static_cast<double>(val_rows.size()));
            }
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            cv_mean[g] = mean_of(fold_losses[g]);
            cv_se[g] = std::sqrt(sample_variance(fold_losses[g]) /
                                 static_cast<double>(options.folds));
        }

        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g) {
            if (cv_mean[g] < cv_mean[best]) best = g;
        }
        if (options.one_se_rule) {
            // grid is descending, so the earliest index within one SE is the
            // largest qualifying penalty
            const double cutoff = cv_mean[best] + cv_se[best];
            for (std::size_t g = 0; g <= best; ++g) {
                if (cv_mean[g] <= cutoff) {
                    best = g;
                    break;
                }
            }
        }
        graph.chosen_lambda[static_cast<std::size_t>(h)] = grid[best];

        LassoProblem full{y, X, grid[best], options.tol, options.max_sweeps};
        const LassoResult fit = lasso_cd(full);
        graph.neighborhoods[static_cast<std::size_t>(h)] = fit.beta;
        Eigen::Index c = 0;
        for (int j = 0; j < H; ++j) {
            if (j == h) continue;
            if (fit.beta(c) != 0.0) claims[static_cast<std::size_t>(h)][static_cast<std::size_t>(j)] = 1;
            ++c;
        }
    }

    for (int a = 0; a < H; ++a) {
        for (int b = a + 1; b < H; ++b) {
            const bool ab = claims[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0;
            const bool ba = claims[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] != 0;
            const bool edge = options.combine == CombineRule::Or ? (ab || ba) : (ab && ba);
            if (edge) graph.edges.emplace_back(a, b);
        }
    }
    return graph;
}

}  // namespace sgame
