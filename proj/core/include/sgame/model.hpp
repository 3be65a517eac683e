#pragma once

#include <Eigen/Core>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "sgame/rng.hpp"

namespace sgame {

// A fitted classifier/generator. Immutable after training; scoring a row of
// the declared arity always yields a probability in [0, 1].
class Model {
public:
    virtual ~Model() = default;
    virtual std::string kind() const = 0;
    virtual std::size_t arity() const = 0;
    virtual Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const = 0;

    // Versioned structured document; round-trips bit-stably for the
    // deterministic kinds.
    nlohmann::json to_json() const;

    std::vector<std::string> feature_names;
    nlohmann::json metadata;  // seed, hyperparameters, convergence report

protected:
    virtual nlohmann::json params_json() const = 0;
    void check_arity(const Eigen::MatrixXd& X) const;
};

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

// --- the Table-1 benchmark set ------------------------------------------------

enum class LearnerKind {
    logistic,
    l1_logistic,
    bagged_logistic,
    lda,
    knn,
    linear_svm,
    tree,
    random_forest,
};

LearnerKind learner_kind_from_name(const std::string& name);
const char* learner_kind_name(LearnerKind kind);

struct LearnerConfig {
    // convex trainers
    double tol = 1e-6;       // gradient infinity-norm target
    int max_iters = 10000;
    double l1_lambda = 0.01;
    // ensembles
    int bags = 25;
    int forest_trees = 25;
    int forest_mtry = -1;  // -1 = round(sqrt(n_cols)), 0 = all features
    bool forest_bootstrap = true;
    // neighbors
    int knn_k = 15;
    // margin classifier
    double svm_reg = 1e-3;
    double svm_lr = 0.5;
    int svm_iters = 2000;
    // tree growth
    int tree_max_depth = 12;
    int tree_min_leaf = 5;

    nlohmann::json to_json() const;
    static LearnerConfig from_json(const nlohmann::json& doc);
};

std::unique_ptr<Model> train_baseline_classifier(LearnerKind kind, const Eigen::MatrixXd& X,
                                                 const std::vector<int>& y,
                                                 const LearnerConfig& config, Rng& rng);

void require_both_classes(const std::vector<int>& y);

// One line of the per-epoch metrics log every deep trainer emits.
struct EpochLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double validation_auc = 0.0;
};

}  // namespace sgame
