#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "sgame/rng.hpp"

namespace sgame {

// S_lambda(theta) = sign(theta) * max(|theta| - lambda, 0).
double soft_threshold(double theta, double lambda);

// One penalized regression of a response column on the remaining columns:
// minimize (1/2N) ||y - X beta||^2 + lambda ||beta||_1.
struct LassoProblem {
    Eigen::VectorXd response;
    Eigen::MatrixXd design;  // columns centered before solving
    double lambda = 0.0;
    double tol = 1e-8;    // max coefficient change per sweep
    int max_sweeps = 2000;
};

struct LassoResult {
    Eigen::VectorXd beta;
    bool converged = false;
    int sweeps = 0;
    double last_delta = 0.0;
};

// Cyclic coordinate descent over partial residuals. Each coordinate is set to
// its exact minimizer S_lambda((1/N)<r + X_j b_j, X_j>) / ((1/N)<X_j, X_j>),
// so the objective is nonincreasing per sweep. On hitting the sweep cap the
// best iterate comes back with converged = false.
LassoResult lasso_cd(const LassoProblem& problem);

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& beta);

// 10 descending log-spaced penalties with lambda_max = (1/N) max_{j != h}
// |<Y_j, Y_h>| and lambda_min = lambda_max / 100, both endpoints included.
std::array<double, 10> lambda_grid(const Eigen::MatrixXd& Y, int h);

enum class CombineRule { Or, And };

struct DependenceGraph {
    std::vector<std::string> vertices;
    std::vector<std::pair<int, int>> edges;          // i < j, sorted
    std::vector<Eigen::VectorXd> neighborhoods;      // beta^h over the other H-1 columns
    std::vector<double> chosen_lambda;

    bool has_edge(int a, int b) const;
};

struct GlassoOptions {
    int folds = 5;
    CombineRule combine = CombineRule::Or;
    bool one_se_rule = false;  // pick the largest lambda within one SE of the CV minimum
    double tol = 1e-8;
    int max_sweeps = 2000;
};

// Appendix-style neighborhood selection: per vertex, lambda is chosen by
// k-fold cross validation on held-out squared prediction loss over the
// lambda_grid; the neighborhood is the support of beta^h at the chosen
// lambda; edges are combined by the OR/AND rule. Columns should arrive
// standardized.
DependenceGraph neighborhood_glasso(const Eigen::MatrixXd& Y,
                                    const std::vector<std::string>& names, Rng& rng,
                                    const GlassoOptions& options = {});

}  // namespace sgame
