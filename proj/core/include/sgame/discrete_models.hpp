#pragma once

#include "sgame/model.hpp"

namespace sgame {

class KnnModel : public Model {
public:
    KnnModel(Eigen::MatrixXd X, std::vector<int> y, int k)
        : X_(std::move(X)), y_(std::move(y)), k_(k) {}

    std::string kind() const override { return "knn"; }
    std::size_t arity() const override { return static_cast<std::size_t>(X_.cols()); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;
    int k() const { return k_; }

protected:
    nlohmann::json params_json() const override;

private:
    Eigen::MatrixXd X_;
    std::vector<int> y_;
    int k_;
};

// CART with Gini impurity. Ties break toward the lowest feature index, then
// the lowest threshold.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double prob = 0.0;  // leaf positive fraction
};

struct TreeGrowth {
    int max_depth = 12;
    int min_leaf = 5;
    int mtry = 0;  // 0 = consider all features
};

std::vector<TreeNode> grow_tree(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                const std::vector<std::size_t>& rows, const TreeGrowth& growth,
                                Rng* feature_sampler);

double tree_score_row(const std::vector<TreeNode>& nodes, const Eigen::RowVectorXd& x);

class TreeModel : public Model {
public:
    TreeModel(std::vector<TreeNode> nodes, std::size_t arity)
        : nodes_(std::move(nodes)), arity_(arity) {}

    std::string kind() const override { return "tree"; }
    std::size_t arity() const override { return arity_; }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;
    const std::vector<TreeNode>& nodes() const { return nodes_; }

protected:
    nlohmann::json params_json() const override;

private:
    std::vector<TreeNode> nodes_;
    std::size_t arity_;
};

class ForestModel : public Model {
public:
    ForestModel(std::vector<std::vector<TreeNode>> trees, std::size_t arity)
        : trees_(std::move(trees)), arity_(arity) {}

    std::string kind() const override { return "random_forest"; }
    std::size_t arity() const override { return arity_; }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override;
    std::size_t n_trees() const { return trees_.size(); }

protected:
    nlohmann::json params_json() const override;

private:
    std::vector<std::vector<TreeNode>> trees_;
    std::size_t arity_;
};

}  // namespace sgame
