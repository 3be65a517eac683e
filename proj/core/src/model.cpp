#include "sgame/model.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "sgame/discrete_models.hpp"
#include "sgame/errors.hpp"
#include "sgame/linear_models.hpp"

namespace sgame {

namespace {
constexpr int kFormatVersion = 1;
}

void Model::check_arity(const Eigen::MatrixXd& X) const {
    if (static_cast<std::size_t>(X.cols()) != arity()) {
        throw ArityMismatch(static_cast<std::size_t>(X.cols()), arity());
    }
}

nlohmann::json Model::to_json() const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = kind();
    j["feature_names"] = feature_names;
    j["metadata"] = metadata.is_null() ? nlohmann::json::object() : metadata;
    j["params"] = params_json();
    return j;
}

void require_both_classes(const std::vector<int>& y) {
    bool pos = false, neg = false;
    for (int v : y) (v ? pos : neg) = true;
    if (!pos || !neg) throw SingleClassError();
}

LearnerKind learner_kind_from_name(const std::string& name) {
    if (name == "logistic") return LearnerKind::logistic;
    if (name == "l1_logistic") return LearnerKind::l1_logistic;
    if (name == "bagged_logistic") return LearnerKind::bagged_logistic;
    if (name == "lda") return LearnerKind::lda;
    if (name == "knn") return LearnerKind::knn;
    if (name == "linear_svm") return LearnerKind::linear_svm;
    if (name == "tree") return LearnerKind::tree;
    if (name == "random_forest") return LearnerKind::random_forest;
    throw ConfigError("unknown learner kind '" + name + "'");
}

const char* learner_kind_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::logistic: return "logistic";
        case LearnerKind::l1_logistic: return "l1_logistic";
        case LearnerKind::bagged_logistic: return "bagged_logistic";
        case LearnerKind::lda: return "lda";
        case LearnerKind::knn: return "knn";
        case LearnerKind::linear_svm: return "linear_svm";
        case LearnerKind::tree: return "tree";
        case LearnerKind::random_forest: return "random_forest";
    }
    return "?";
}

nlohmann::json LearnerConfig::to_json() const {
    return nlohmann::json{{"tol", tol},
                          {"max_iters", max_iters},
                          {"l1_lambda", l1_lambda},
                          {"bags", bags},
                          {"forest_trees", forest_trees},
                          {"forest_mtry", forest_mtry},
                          {"forest_bootstrap", forest_bootstrap},
                          {"knn_k", knn_k},
                          {"svm_reg", svm_reg},
                          {"svm_lr", svm_lr},
                          {"svm_iters", svm_iters},
                          {"tree_max_depth", tree_max_depth},
                          {"tree_min_leaf", tree_min_leaf}};
}

LearnerConfig LearnerConfig::from_json(const nlohmann::json& doc) {
    LearnerConfig c;
    c.tol = doc.value("tol", c.tol);
    c.max_iters = doc.value("max_iters", c.max_iters);
    c.l1_lambda = doc.value("l1_lambda", c.l1_lambda);
    c.bags = doc.value("bags", c.bags);
    c.forest_trees = doc.value("forest_trees", c.forest_trees);
    c.forest_mtry = doc.value("forest_mtry", c.forest_mtry);
    c.forest_bootstrap = doc.value("forest_bootstrap", c.forest_bootstrap);
    c.knn_k = doc.value("knn_k", c.knn_k);
    c.svm_reg = doc.value("svm_reg", c.svm_reg);
    c.svm_lr = doc.value("svm_lr", c.svm_lr);
    c.svm_iters = doc.value("svm_iters", c.svm_iters);
    c.tree_max_depth = doc.value("tree_max_depth", c.tree_max_depth);
    c.tree_min_leaf = doc.value("tree_min_leaf", c.tree_min_leaf);
    return c;
}

namespace {

nlohmann::json convergence_report(const LogisticFit& fit) {
    return nlohmann::json{{"converged", fit.converged},
                          {"iterations", fit.iterations},
                          {"final_grad_norm", fit.final_grad_norm}};
}

std::unique_ptr<Model> train_lda(const Eigen::MatrixXd& X, const std::vector<int>& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
    double n0 = 0, n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[static_cast<std::size_t>(i)]) {
            mu1 += X.row(i).transpose();
            n1 += 1;
        } else {
            mu0 += X.row(i).transpose();
            n0 += 1;
        }
    }
    mu0 /= n0;
    mu1 /= n1;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd c =
            X.row(i).transpose() - (y[static_cast<std::size_t>(i)] ? mu1 : mu0);
        S.noalias() += c * c.transpose();
    }
    S /= static_cast<double>(n - 2);

    bool ridged = false;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() < 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
        // singular pooled covariance: fall back to a small ridge
        ridged = true;
        const double ridge = std::max(1e-8 * S.trace() / static_cast<double>(d), 1e-12);
        ldlt.compute(S + ridge * Eigen::MatrixXd::Identity(d, d));
        if (ldlt.info() != Eigen::Success) throw SingularCovariance();
    }
    const Eigen::VectorXd w = ldlt.solve(mu1 - mu0);
    const double b = -0.5 * (mu1 + mu0).dot(w) + std::log(n1 / n0);
    auto model = std::make_unique<LinearModel>("lda", w, b);
    model->metadata["ridged"] = ridged;
    return model;
}

std::unique_ptr<Model> train_linear_svm(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                        const LearnerConfig& cfg) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::VectorXd ys(n);
    for (Eigen::Index i = 0; i < n; ++i) ys(i) = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    for (int it = 0; it < cfg.svm_iters; ++it) {
        Eigen::VectorXd margins = X * w;
        margins.array() += b;
        Eigen::VectorXd gw = cfg.svm_reg * w;
        double gb = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (ys(i) * margins(i) < 1.0) {
                gw -= ys(i) / static_cast<double>(n) * X.row(i).transpose();
                gb -= ys(i) / static_cast<double>(n);
            }
        }
        const double eta = cfg.svm_lr / (1.0 + static_cast<double>(it) / 100.0);
        w -= eta * gw;
        b -= eta * gb;
    }
    // AUC-safe probabilities: logistic link on the raw margin
    return std::make_unique<LinearModel>("linear_svm", w, b);
}

}  // namespace

std::unique_ptr<Model> train_baseline_classifier(LearnerKind kind, const Eigen::MatrixXd& X,
                                                 const std::vector<int>& y,
                                                 const LearnerConfig& config, Rng& rng) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw LengthMismatch(X.rows(), y.size());
    require_both_classes(y);

    std::unique_ptr<Model> model;
    switch (kind) {
        case LearnerKind::logistic: {
            const LogisticFit fit = fit_logistic(X, y, config.tol, config.max_iters);
            model = std::make_unique<LinearModel>("logistic", fit.w, fit.b);
            model->metadata["convergence"] = convergence_report(fit);
            break;
        }
        case LearnerKind::l1_logistic: {
            const LogisticFit fit =
                fit_l1_logistic(X, y, config.l1_lambda, config.tol, config.max_iters);
            model = std::make_unique<LinearModel>("l1_logistic", fit.w, fit.b);
            model->metadata["convergence"] = convergence_report(fit);
            model->metadata["lambda"] = config.l1_lambda;
            break;
        }
        case LearnerKind::bagged_logistic: {
            std::vector<Eigen::VectorXd> ws;
            std::vector<double> bs;
            for (int m = 0; m < config.bags; ++m) {
                Rng member_rng = rng.fork(static_cast<std::uint64_t>(m));
                Eigen::MatrixXd Xb(X.rows(), X.cols());
                std::vector<int> yb(y.size());
                // resample until the bootstrap keeps both classes
                while (true) {
                    for (Eigen::Index i = 0; i < X.rows(); ++i) {
                        const std::size_t r = member_rng.uniform_index(y.size());
                        Xb.row(i) = X.row(static_cast<Eigen::Index>(r));
                        yb[static_cast<std::size_t>(i)] = y[r];
                    }
                    bool pos = false, neg = false;
                    for (int v : yb) (v ? pos : neg) = true;
                    if (pos && neg) break;
                }
                const LogisticFit fit = fit_logistic(Xb, yb, config.tol, config.max_iters);
                ws.push_back(fit.w);
                bs.push_back(fit.b);
            }
            model = std::make_unique<BaggedLogisticModel>(std::move(ws), std::move(bs));
            model->metadata["bags"] = config.bags;
            break;
        }
        case LearnerKind::lda:
            model = train_lda(X, y);
            break;
        case LearnerKind::knn:
            model = std::make_unique<KnnModel>(X, y, config.knn_k);
            break;
        case LearnerKind::linear_svm:
            model = train_linear_svm(X, y, config);
            break;
        case LearnerKind::tree: {
            std::vector<std::size_t> rows(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) rows[i] = i;
            TreeGrowth growth{config.tree_max_depth, config.tree_min_leaf, 0};
            model = std::make_unique<TreeModel>(grow_tree(X, y, rows, growth, nullptr),
                                                static_cast<std::size_t>(X.cols()));
            break;
        }
        case LearnerKind::random_forest: {
            const int d = static_cast<int>(X.cols());
            int mtry = config.forest_mtry;
            if (mtry < 0) mtry = std::max(1, static_cast<int>(std::lround(std::sqrt(d))));
            TreeGrowth growth{config.tree_max_depth, config.tree_min_leaf, mtry};
            std::vector<std::vector<TreeNode>> trees;
            for (int t = 0; t < config.forest_trees; ++t) {
                Rng tree_rng = rng.fork(static_cast<std::uint64_t>(t));
                std::vector<std::size_t> rows;
                rows.reserve(y.size());
                if (config.forest_bootstrap) {
                    for (std::size_t i = 0; i < y.size(); ++i) {
                        rows.push_back(tree_rng.uniform_index(y.size()));
                    }
                } else {
                    for (std::size_t i = 0; i < y.size(); ++i) rows.push_back(i);
                }
                trees.push_back(grow_tree(X, y, rows, growth, &tree_rng));
            }
            model = std::make_unique<ForestModel>(std::move(trees), static_cast<std::size_t>(d));
            model->metadata["mtry"] = mtry;
            model->metadata["bootstrap"] = config.forest_bootstrap;
            break;
        }
    }
    model->metadata["seed"] = rng.seed();
    model->metadata["n_train_rows"] = y.size();
    return model;
}

// ---------------------------------------------------------------------------
// deserialization

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

std::vector<TreeNode> nodes_from_json(const nlohmann::json& arr) {
    std::vector<TreeNode> nodes;
    for (const auto& j : arr) {
        TreeNode n;
        n.feature = j.at("feature").get<int>();
        n.threshold = j.at("threshold").get<double>();
        n.left = j.at("left").get<int>();
        n.right = j.at("right").get<int>();
        n.prob = j.at("prob").get<double>();
        nodes.push_back(n);
    }
    return nodes;
}

}  // namespace

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc) {
    if (doc.value("format_version", 0) != kFormatVersion) {
        throw ConfigError("unsupported model format version");
    }
    const std::string kind = doc.at("kind").get<std::string>();
    const nlohmann::json& p = doc.at("params");
    std::unique_ptr<Model> model;
    if (kind == "logistic" || kind == "l1_logistic" || kind == "lda" || kind == "linear_svm") {
        model = std::make_unique<LinearModel>(kind, vector_from_json(p.at("weights")),
                                              p.at("intercept").get<double>());
    } else if (kind == "bagged_logistic") {
        std::vector<Eigen::VectorXd> ws;
        std::vector<double> bs;
        for (const auto& m : p.at("members")) {
            ws.push_back(vector_from_json(m.at("weights")));
            bs.push_back(m.at("intercept").get<double>());
        }
        model = std::make_unique<BaggedLogisticModel>(std::move(ws), std::move(bs));
    } else if (kind == "knn") {
        const auto& rows = p.at("x");
        const std::size_t n = rows.size();
        const std::size_t d = n ? rows[0].size() : 0;
        Eigen::MatrixXd X(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rows[i][j].get<double>();
            }
        }
        model = std::make_unique<KnnModel>(std::move(X), p.at("y").get<std::vector<int>>(),
                                           p.at("k").get<int>());
    } else if (kind == "tree") {
        model = std::make_unique<TreeModel>(nodes_from_json(p.at("nodes")),
                                            p.at("arity").get<std::size_t>());
    } else if (kind == "random_forest") {
        std::vector<std::vector<TreeNode>> trees;
        for (const auto& t : p.at("trees")) trees.push_back(nodes_from_json(t));
        model = std::make_unique<ForestModel>(std::move(trees), p.at("arity").get<std::size_t>());
    } else if (kind == "mlp" || kind == "bilstm") {
        throw ConfigError("deep model checkpoints are restored by their own loaders");
    } else {
        throw ConfigError("unknown model kind '" + kind + "'");
    }
    model->feature_names = doc.value("feature_names", std::vector<std::string>{});
    model->metadata = doc.value("metadata", nlohmann::json::object());
    return model;
}

}  // namespace sgame
