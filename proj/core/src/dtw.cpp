#include "sgame/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sgame/errors.hpp"

namespace sgame {

double dtw(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptySeries();
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // two-row dynamic program
    std::vector<double> prev(m + 1, kInf), curr(m + 1, kInf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = kInf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double cost = std::fabs(a[i - 1] - b[j - 1]);
            curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

StatTestResult dtw_permutation_test(std::span<const double> original,
                                    std::span<const double> generated, int n_permutations,
                                    Rng& rng, PermutationScheme scheme) {
    if (original.empty() || generated.empty()) throw EmptySeries();

    StatTestResult res;
    res.n_before = original.size();
    res.n_after = generated.size();
    res.statistic = dtw(original, generated);

    std::vector<double> a(original.begin(), original.end());
    std::vector<double> b(generated.begin(), generated.end());
    std::vector<double> pooled;
    if (scheme == PermutationScheme::cross_swap) {
        pooled.reserve(a.size() + b.size());
        pooled.insert(pooled.end(), a.begin(), a.end());
        pooled.insert(pooled.end(), b.begin(), b.end());
    }

    int at_or_below = 0;
    for (int k = 0; k < n_permutations; ++k) {
        double score;
        if (scheme == PermutationScheme::within_series) {
            rng.shuffle(a);
            rng.shuffle(b);
            score = dtw(a, b);
        } else {
            rng.shuffle(pooled);
            std::span<const double> pa(pooled.data(), original.size());
            std::span<const double> pb(pooled.data() + original.size(), generated.size());
            score = dtw(pa, pb);
        }
        if (score <= res.statistic) ++at_or_below;
    }
    res.p_value = static_cast<double>(at_or_below) / static_cast<double>(n_permutations);
    return res;
}

}  // namespace sgame
