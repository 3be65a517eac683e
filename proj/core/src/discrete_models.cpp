#include "sgame/discrete_models.hpp"

#include <algorithm>
#include <numeric>

#include "sgame/errors.hpp"

namespace sgame {

Eigen::VectorXd KnnModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    const std::size_t n_train = static_cast<std::size_t>(X_.rows());
    const int k = std::min<int>(k_, static_cast<int>(n_train));
    Eigen::VectorXd out(X.rows());
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (std::size_t t = 0; t < n_train; ++t) {
            dist[t] = {(X_.row(static_cast<Eigen::Index>(t)) - X.row(i)).squaredNorm(), t};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        int votes = 0;
        for (int t = 0; t < k; ++t) votes += y_[dist[static_cast<std::size_t>(t)].second];
        out(i) = static_cast<double>(votes) / static_cast<double>(k);
    }
    return out;
}

nlohmann::json KnnModel::params_json() const {
    nlohmann::json j;
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(X_.rows()));
    for (Eigen::Index i = 0; i < X_.rows(); ++i) {
        const Eigen::RowVectorXd row = X_.row(i);  // contiguous copy
        rows.emplace_back(row.data(), row.data() + row.size());
    }
    j["x"] = rows;
    j["y"] = y_;
    j["k"] = k_;
    return j;
}

namespace {

double gini(double n_pos, double n_total) {
    if (n_total <= 0.0) return 0.0;
    const double p = n_pos / n_total;
    return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double improvement = 0.0;
};

SplitChoice best_split(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const std::vector<std::size_t>& rows, const std::vector<int>& features,
                       int min_leaf) {
    const double n = static_cast<double>(rows.size());
    double pos = 0;
    for (std::size_t r : rows) pos += y[r];
    const double parent = gini(pos, n);

    SplitChoice best;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (int f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            vals[i] = {X(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]]};
        }
        std::sort(vals.begin(), vals.end());
        double left_pos = 0, left_n = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_pos += vals[i].second;
            left_n += 1;
            if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
            const double right_n = n - left_n;
            if (left_n < min_leaf || right_n < min_leaf) continue;
            const double w_child =
                (left_n / n) * gini(left_pos, left_n) + (right_n / n) * gini(pos - left_pos, right_n);
            const double improvement = parent - w_child;
            // strict > keeps the first (lowest feature, lowest threshold) winner
            if (improvement > best.improvement + 1e-15 && improvement > 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.improvement = improvement;
            }
        }
    }
    return best;
}

int grow_node(std::vector<TreeNode>& nodes, const Eigen::MatrixXd& X, const std::vector<int>& y,
              std::vector<std::size_t>& rows, int depth, const TreeGrowth& growth,
              Rng* feature_sampler) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double pos = 0;
    for (std::size_t r : rows) pos += y[r];
    nodes[static_cast<std::size_t>(node_id)].prob = pos / static_cast<double>(rows.size());

    if (depth >= growth.max_depth || rows.size() < 2 * static_cast<std::size_t>(growth.min_leaf) ||
        pos == 0.0 || pos == static_cast<double>(rows.size())) {
        return node_id;
    }

    std::vector<int> features;
    const int d = static_cast<int>(X.cols());
    if (growth.mtry > 0 && growth.mtry < d && feature_sampler != nullptr) {
        // partial Fisher-Yates draw of mtry distinct features, sorted for the
        // deterministic tie-break
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < growth.mtry; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) +
                feature_sampler->uniform_index(static_cast<std::size_t>(d - i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        features.assign(all.begin(), all.begin() + growth.mtry);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
    }

    const SplitChoice split = best_split(X, y, rows, features, growth.min_leaf);
    if (!split.found) return node_id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        (X(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left_rows : right_rows)
            .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = grow_node(nodes, X, y, left_rows, depth + 1, growth, feature_sampler);
    const int right = grow_node(nodes, X, y, right_rows, depth + 1, growth, feature_sampler);
    TreeNode& node = nodes[static_cast<std::size_t>(node_id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

}  // namespace

std::vector<TreeNode> grow_tree(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                const std::vector<std::size_t>& rows, const TreeGrowth& growth,
                                Rng* feature_sampler) {
    std::vector<TreeNode> nodes;
    std::vector<std::size_t> mutable_rows = rows;
    grow_node(nodes, X, y, mutable_rows, 0, growth, feature_sampler);
    return nodes;
}

double tree_score_row(const std::vector<TreeNode>& nodes, const Eigen::RowVectorXd& x) {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(id)];
        id = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].prob;
}

Eigen::VectorXd TreeModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = tree_score_row(nodes_, X.row(i));
    return out;
}

namespace {

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TreeNode& n : nodes) {
        arr.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"prob", n.prob}});
    }
    return arr;
}

}  // namespace

nlohmann::json TreeModel::params_json() const {
    return nlohmann::json{{"nodes", nodes_to_json(nodes_)}, {"arity", arity_}};
}

Eigen::VectorXd ForestModel::predict_proba(const Eigen::MatrixXd& X) const {
    check_arity(X);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(X.rows());
    for (const auto& tree : trees_) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc(i) += tree_score_row(tree, X.row(i));
    }
    return acc / static_cast<double>(trees_.size());
}

nlohmann::json ForestModel::params_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees_) arr.push_back(nodes_to_json(tree));
    return nlohmann::json{{"trees", std::move(arr)}, {"arity", arity_}};
}

}  // namespace sgame
