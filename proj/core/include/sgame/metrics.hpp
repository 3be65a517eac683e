#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sgame {

struct RocResult {
    std::vector<std::pair<double, double>> points;  // (FPR, TPR), (0,0) .. (1,1)
    double auc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// AUC = (concordant + 0.5 * tied) / (n_pos * n_neg); equal scores are grouped
// so the trapezoidal area of `points` reproduces the same value.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace sgame
