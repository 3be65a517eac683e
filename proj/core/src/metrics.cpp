#include "sgame/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "sgame/errors.hpp"

namespace sgame {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw LengthMismatch(scores.size(), labels.size());
    RocResult res;
    for (int y : labels) (y ? res.n_pos : res.n_neg)++;
    if (res.n_pos == 0 || res.n_neg == 0) throw SingleClassError();

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    // sweep thresholds downward, grouping tied scores
    const double np = static_cast<double>(res.n_pos);
    const double nn = static_cast<double>(res.n_neg);
    res.points.emplace_back(0.0, 0.0);
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) (labels[order[k]] ? tp : fp)++;
        res.points.emplace_back(fp / nn, tp / np);
        i = j;
    }

    double area = 0.0;
    for (std::size_t k = 1; k < res.points.size(); ++k) {
        const auto& [x0, y0] = res.points[k - 1];
        const auto& [x1, y1] = res.points[k];
        area += (x1 - x0) * (y0 + y1) * 0.5;
    }
    res.auc = area;
    return res;
}

}  // namespace sgame
