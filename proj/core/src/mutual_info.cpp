#include "sgame/mutual_info.hpp"

#include <algorithm>
#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {

std::vector<int> equal_width_bins(std::span<const double> x, int bins) {
    if (bins < 1) throw Error("bin count must be positive");
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<int> idx(x.size(), 0);
    if (hi <= lo) return idx;
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = static_cast<int>((x[i] - lo) / width);
        if (b >= bins) b = bins - 1;  // the max value belongs to the last bin
        if (b < 0) b = 0;
        idx[i] = b;
    }
    return idx;
}

namespace {

double mi_from_bins(const std::vector<int>& bx, const std::vector<int>& by, int bins_x, int bins_y) {
    const std::size_t n = bx.size();
    std::vector<double> joint(static_cast<std::size_t>(bins_x) * bins_y, 0.0);
    std::vector<double> px(bins_x, 0.0), py(bins_y, 0.0);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(bx[i]) * bins_y + by[i]] += w;
        px[bx[i]] += w;
        py[by[i]] += w;
    }
    double mi = 0.0;
    for (int a = 0; a < bins_x; ++a) {
        for (int b = 0; b < bins_y; ++b) {
            const double pab = joint[static_cast<std::size_t>(a) * bins_y + b];
            if (pab > 0.0) mi += pab * std::log(pab / (px[a] * py[b]));
        }
    }
    return std::max(mi, 0.0);
}

}  // namespace

double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
    if (x.size() < 2) throw Error("mutual information needs at least 2 samples");
    std::vector<int> bx = equal_width_bins(x, bins);
    std::vector<int> by = equal_width_bins(y, bins);
    // canonical argument order so MI(x, y) == MI(y, x) to the last bit
    if (std::lexicographical_compare(by.begin(), by.end(), bx.begin(), bx.end())) {
        std::swap(bx, by);
    }
    return mi_from_bins(bx, by, bins, bins);
}

double binned_entropy(std::span<const double> x, int bins) {
    const std::vector<int> bx = equal_width_bins(x, bins);
    std::vector<double> p(static_cast<std::size_t>(bins), 0.0);
    const double w = 1.0 / static_cast<double>(x.size());
    for (int b : bx) p[static_cast<std::size_t>(b)] += w;
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

std::vector<int> mrmr_select(const FeatureMatrix& X, std::span<const int> labels, std::size_t k,
                             int bins) {
    const std::size_t d = X.n_cols();
    if (k < 1 || k > d) throw KOutOfRange(k, d);
    if (labels.size() != X.n_rows()) throw LengthMismatch(labels.size(), X.n_rows());

    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = static_cast<double>(labels[i]);

    auto column_bins = [&](std::size_t j) {
        return X.columns[j].tag == ColumnTag::dummy ? 2 : bins;
    };
    auto column = [&](std::size_t j) {
        return std::span<const double>(X.values.col(static_cast<Eigen::Index>(j)).data(),
                                       X.n_rows());
    };

    // relevance of every candidate against the target
    std::vector<double> relevance(d);
    for (std::size_t j = 0; j < d; ++j) {
        relevance[j] = mutual_information(column(j), y, column_bins(j));
    }

    std::vector<int> selected;
    std::vector<std::uint8_t> used(d, 0);
    std::vector<double> redundancy_sum(d, 0.0);
    while (selected.size() < k) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d; ++j) {
            if (used[j]) continue;
            const double red = selected.empty()
                                   ? 0.0
                                   : redundancy_sum[j] / static_cast<double>(selected.size());
            const double score = relevance[j] - red;
            if (score > best_score) {  // strict > keeps the lowest index on ties
                best_score = score;
                best = static_cast<int>(j);
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        selected.push_back(best);
        // fold the new pick into every remaining candidate's redundancy
        for (std::size_t j = 0; j < d; ++j) {
            if (used[j]) continue;
            const int b = std::max(column_bins(j), column_bins(static_cast<std::size_t>(best)));
            redundancy_sum[j] +=
                mutual_information(column(j), column(static_cast<std::size_t>(best)), b);
        }
    }
    return selected;
}

}  // namespace sgame
