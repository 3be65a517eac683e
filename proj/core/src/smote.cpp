#include "sgame/smote.hpp"

#include <algorithm>
#include <numeric>

#include "sgame/errors.hpp"

namespace sgame {

std::pair<FeatureMatrix, std::vector<int>> smote(const FeatureMatrix& X,
                                                 std::span<const int> labels, int k_neighbors,
                                                 Rng& rng) {
    if (labels.size() != X.n_rows()) throw LengthMismatch(labels.size(), X.n_rows());
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) throw SingleClassError();

    const bool positive_is_minority = pos.size() < neg.size();
    const std::vector<std::size_t>& minority = positive_is_minority ? pos : neg;
    const std::size_t deficit =
        (positive_is_minority ? neg.size() : pos.size()) - minority.size();
    if (minority.size() < 2) throw MinorityTooSmall(minority.size());

    const int k = std::min<int>(k_neighbors, static_cast<int>(minority.size()) - 1);

    // k nearest minority neighbors of each minority row (brute force; ties by
    // index for determinism)
    const std::size_t m = minority.size();
    std::vector<std::vector<std::size_t>> neighbors(m);
    std::vector<std::pair<double, std::size_t>> dists(m - 1);
    for (std::size_t a = 0; a < m; ++a) {
        dists.clear();
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            const double d2 = (X.values.row(static_cast<Eigen::Index>(minority[a])) -
                               X.values.row(static_cast<Eigen::Index>(minority[b])))
                                  .squaredNorm();
            dists.emplace_back(d2, b);
        }
        std::sort(dists.begin(), dists.end());
        neighbors[a].reserve(static_cast<std::size_t>(k));
        for (int t = 0; t < k; ++t) neighbors[a].push_back(dists[static_cast<std::size_t>(t)].second);
    }

    FeatureMatrix out = X;
    out.values.conservativeResize(X.values.rows() + static_cast<Eigen::Index>(deficit),
                                  Eigen::NoChange);
    std::vector<int> out_labels(labels.begin(), labels.end());
    const int minority_label = positive_is_minority ? 1 : 0;

    for (std::size_t s = 0; s < deficit; ++s) {
        const std::size_t a = s % m;  // cycle through minority points
        const std::size_t b = neighbors[a][rng.uniform_index(neighbors[a].size())];
        const double u = rng.uniform01();
        const auto p = X.values.row(static_cast<Eigen::Index>(minority[a]));
        const auto q = X.values.row(static_cast<Eigen::Index>(minority[b]));
        out.values.row(X.values.rows() + static_cast<Eigen::Index>(s)) = p + u * (q - p);
        out_labels.push_back(minority_label);
    }
    out.target = out_labels;
    return {std::move(out), std::move(out_labels)};
}

}  // namespace sgame
